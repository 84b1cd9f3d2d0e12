use std::path::Path;
use std::process::{Command, Output};

use east_plus::io::{parse_signal, signal_to_csv};
use east_plus::Signal;

fn eastp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eastp"))
        .args(args)
        .arg("--output")
        .arg(dir)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = eastp(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn every_subcommand_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let small = ["--n-hat", "64", "--seeds", "2", "--c", "0.9"];
    ok(d, &[&["plan"], &small[..]].concat());
    assert!(read(d, "plan.csv").starts_with("n_hat,method,ell,kappa,epsilon,flags"));
    ok(d, &[&["project"], &small[..]].concat());
    let stdout = ok(d, &[&["reconstruct"], &small[..]].concat());
    assert!(stdout.contains("relative_error="));
    assert!(d.join("reconstruction.csv").exists());
    ok(d, &[&["simulate"], &small[..]].concat());
    for f in ["ledger.csv", "trace.csv", "projections.csv", "simulate.manifest.json"] {
        assert!(d.join(f).exists(), "{f} missing");
    }
    ok(d, &["conjecture", "--trials", "50"]);
    assert!(read(d, "conjecture.txt").contains("0 non-positive"));
    ok(d, &[&["evaluate"], &small[..]].concat());
    let eval = read(d, "evaluate.csv");
    for method in ["east-plus", "east-equality", "east-1", "east-2", "east-3"] {
        assert!(eval.contains(method), "{method} missing from evaluate.csv");
    }
    let manifest: serde_json::Value = serde_json::from_str(&read(d, "evaluate.manifest.json")).unwrap();
    assert_eq!(manifest["command"], "evaluate");
}

#[test]
fn one_instant_per_node_samples_everything() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["plan", "--n-hat", "8", "--nodes", "8", "--k", "2"]);
    let plan = read(dir.path(), "plan.csv");
    let row = plan.lines().find(|l| l.contains(",east-plus,")).unwrap();
    let kappa: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
    assert_eq!(kappa, 1.0);
}

#[test]
fn simulate_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["simulate", "--seed", "7", "--n-hat", "128"];
    ok(a.path(), &args);
    ok(b.path(), &args);
    for f in ["ledger.csv", "trace.csv", "projections.csv"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f} differs");
    }
}

#[test]
fn exit_codes_separate_bad_input_from_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(eastp(dir.path(), &["plan", "--k", "0"]).status.code(), Some(1));
    assert_eq!(eastp(dir.path(), &["plan", "--no-such-flag"]).status.code(), Some(1));
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a,b\n1,\n").unwrap();
    let out = eastp(dir.path(), &["project", "--signal", bad.to_str().unwrap(), "--nodes", "2", "--n-hat", "2", "--k", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing measurement"));
    let missing = dir.path().join("absent.csv");
    let out = eastp(dir.path(), &["project", "--signal", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn signal_csv_round_trips_through_project() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<Vec<f64>> = (0..16).map(|h| (0..4).map(|j| (h * 4 + j) as f64 / 7.0).collect()).collect();
    let signal = Signal::from_rows(&rows).unwrap();
    let input = dir.path().join("input.csv");
    std::fs::write(&input, signal_to_csv(&signal).unwrap()).unwrap();
    ok(
        dir.path(),
        &["project", "--signal", input.to_str().unwrap(), "--nodes", "4", "--n-hat", "64"],
    );
    let echoed = parse_signal(read(dir.path(), "signal.csv").as_bytes()).unwrap();
    assert_eq!(echoed, signal);
}
