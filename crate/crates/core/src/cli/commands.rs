use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use crate::analysis::conjecture_experiment;
use crate::decoder::{error_for_projections, partition, reconstruct};
use crate::error::{Error, Result};
use crate::io;
use crate::model::{finish_csv, EnergyProfile, ModelConstants, SamplingPlan};
use crate::netsim::{evaluate_plan, run};
use crate::planner::{
    east_baseline_plan, east_equality_plan, east_plus_plan, fixed_baselines, PlanResult, PlannerOptions,
};
use crate::projection::project;
use crate::signal::{relative_error, Signal};
use crate::transform::TransformBasis;

pub const EAST_PLUS: &str = "east-plus";
pub const EAST_EQUALITY: &str = "east-equality";
pub const BASELINES: [&str; 3] = ["east-1", "east-2", "east-3"];

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    config: &'a ExperimentConfig,
    outputs: Vec<String>,
}

fn write(cfg: &ExperimentConfig, name: &str, contents: &str, outputs: &mut Vec<PathBuf>) -> Result<()> {
    fs::create_dir_all(&cfg.output)?;
    let path = cfg.output.join(name);
    fs::write(&path, contents)?;
    outputs.push(path);
    Ok(())
}

fn finish(cfg: &ExperimentConfig, command: &str, mut outputs: Vec<PathBuf>) -> Result<Vec<PathBuf>> {
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        config: cfg,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let json = serde_json::to_string_pretty(&manifest)? + "\n";
    write(cfg, &format!("{command}.manifest.json"), &json, &mut outputs)?;
    Ok(outputs)
}

fn planner_options(cfg: &ExperimentConfig, seed: u64) -> PlannerOptions {
    PlannerOptions {
        max_projections: cfg.max_projections,
        seed,
        ..Default::default()
    }
}

/// Named plans compared by `plan` and `evaluate`.
pub struct MethodPlans {
    pub east_plus: PlanResult,
    pub plans: Vec<(&'static str, SamplingPlan)>,
}

/// The optimal plan, the three fixed baselines that fit the budget and the all-active plan.
pub fn method_plans(
    profile: &EnergyProfile,
    constants: &ModelConstants,
    n_hat: usize,
    options: &PlannerOptions,
) -> Result<MethodPlans> {
    let east_plus = east_plus_plan(profile, constants, n_hat, options)?;
    let mut plans = vec![(EAST_PLUS, east_plus.plan.clone())];
    for (name, (ell, kappa)) in BASELINES.iter().zip(fixed_baselines(&east_plus)) {
        match east_baseline_plan(ell, kappa, profile, constants, n_hat, options.seed) {
            Ok(r) => plans.push((name, r.plan)),
            Err(e) => log::warn!("skipping {name} at n_hat={n_hat}: {e}"),
        }
    }
    let instants = n_hat / profile.len();
    match east_equality_plan(profile, east_plus.plan.ell, constants.c4(), instants, options.seed) {
        Ok(p) => plans.push((EAST_EQUALITY, p)),
        Err(e) => log::warn!("skipping {EAST_EQUALITY} at n_hat={n_hat}: {e}"),
    }
    Ok(MethodPlans { east_plus, plans })
}

pub fn cmd_plan(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n_hat", "method", "ell", "kappa", "epsilon", "flags"])?;
    for &n_hat in &cfg.n_hat {
        let profile = cfg.profile(n_hat)?;
        let constants = cfg.constants(n_hat)?;
        let mp = method_plans(&profile, &constants, n_hat, &planner_options(cfg, cfg.seed))?;
        for (name, plan) in &mp.plans {
            let (eps, flags) = if *name == EAST_PLUS {
                let mut f = Vec::new();
                if mp.east_plus.trivially_feasible {
                    f.push("trivially-feasible");
                }
                if mp.east_plus.conjecture_fallback {
                    f.push("all-caps-enforced");
                }
                (mp.east_plus.epsilon.to_string(), f.join(";"))
            } else if *name == EAST_EQUALITY {
                let eps = error_for_projections(plan.ell as f64, &constants, n_hat, plan.max_inverse_probability());
                (eps.to_string(), String::new())
            } else {
                let eps = crate::planner::predicted_error(plan, &profile, &constants, n_hat);
                (eps.to_string(), String::new())
            };
            w.write_record([
                n_hat.to_string(),
                name.to_string(),
                plan.ell.to_string(),
                plan.kappa.to_string(),
                eps,
                flags,
            ])?;
        }
    }
    let mut outputs = Vec::new();
    write(cfg, "plan.csv", &finish_csv(w)?, &mut outputs)?;
    finish(cfg, "plan", outputs)
}

/// Signal, profile, constants and optimal plan of the first trial at the first length.
struct Single {
    n_hat: usize,
    signal: Signal,
    profile: EnergyProfile,
    constants: ModelConstants,
    plan: PlanResult,
}

fn single(cfg: &ExperimentConfig) -> Result<Single> {
    let n_hat = cfg.n_hat[0];
    let signal = cfg.signals(n_hat, 1)?.remove(0);
    let profile = cfg.profile(n_hat)?;
    let constants = cfg.constants(n_hat)?;
    let plan = east_plus_plan(&profile, &constants, n_hat, &planner_options(cfg, cfg.matrix_seed(n_hat, 0)))?;
    Ok(Single {
        n_hat,
        signal,
        profile,
        constants,
        plan,
    })
}

fn vector_csv(name: &str, values: &[f64]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["row", name])?;
    for (r, v) in values.iter().enumerate() {
        w.write_record([r.to_string(), v.to_string()])?;
    }
    finish_csv(w)
}

fn read_vector(path: &std::path::Path) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    rdr.records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec?;
            let cell = rec.get(1).unwrap_or("");
            cell.parse()
                .map_err(|_| Error::Csv(format!("bad projection value '{cell}' on row {}", i + 1)))
        })
        .collect()
}

pub fn cmd_project(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let s = single(cfg)?;
    let x = project(s.signal.as_vector(), &s.plan.plan)?;
    let mut outputs = Vec::new();
    write(cfg, "projections.csv", &vector_csv("x", &x)?, &mut outputs)?;
    write(cfg, "signal.csv", &io::signal_to_csv(&s.signal)?, &mut outputs)?;
    println!(
        "n_hat={} ell={} kappa={} seed={}",
        s.n_hat, s.plan.plan.ell, s.plan.plan.kappa, s.plan.plan.seed
    );
    finish(cfg, "project", outputs)
}

pub fn cmd_reconstruct(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let s = single(cfg)?;
    let path = cfg.projections_path();
    let x = read_vector(&path)?;
    if x.len() != s.plan.plan.ell {
        return Err(Error::config(
            "projections",
            format!("{} holds {} values but the plan has ell = {}", path.display(), x.len(), s.plan.plan.ell),
        ));
    }
    let basis = TransformBasis::new(cfg.basis, s.n_hat)?;
    let part = partition(s.plan.plan.ell, cfg.gamma, cfg.c, s.n_hat)?;
    let u_hat = reconstruct(&x, &s.plan.plan, &basis, cfg.k, &part)?;
    let estimate = Signal::from_vectorized(s.signal.instants(), s.signal.nodes(), u_hat)?;
    let err = relative_error(s.signal.as_vector(), estimate.as_vector())?;
    let mut outputs = Vec::new();
    write(cfg, "reconstruction.csv", &io::signal_to_csv(&estimate)?, &mut outputs)?;
    println!("n_hat={} relative_error={err}", s.n_hat);
    finish(cfg, "reconstruct", outputs)
}

pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let s = single(cfg)?;
    let sim = run(&s.signal, &s.plan.plan, &s.profile, s.constants.c4())?;
    let basis = TransformBasis::new(cfg.basis, s.n_hat)?;
    let part = partition(s.plan.plan.ell, cfg.gamma, cfg.c, s.n_hat)?;
    let u_hat = sim.base.decode(&s.plan.plan, &basis, cfg.k, &part)?;
    let err = relative_error(s.signal.as_vector(), &u_hat)?;
    let mut outputs = Vec::new();
    write(cfg, "ledger.csv", &sim.ledger.to_csv()?, &mut outputs)?;
    write(cfg, "trace.csv", &sim.trace.to_csv()?, &mut outputs)?;
    write(cfg, "projections.csv", &vector_csv("x", &sim.x)?, &mut outputs)?;
    println!(
        "n_hat={} ell={} messages={} energy_neutral={} relative_error={err}",
        s.n_hat,
        s.plan.plan.ell,
        sim.trace.messages.len(),
        sim.ledger.is_energy_neutral()
    );
    finish(cfg, "simulate", outputs)
}

pub fn cmd_conjecture(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut summary = String::new();
    let mut first = true;
    for (si, (alpha, beta)) in cfg.shape_pairs()?.into_iter().enumerate() {
        for (bi, &budget) in cfg.budget_ratios.iter().enumerate() {
            let seed = crate::rng::derive_seed(cfg.seed, (si * 1000 + bi) as u64);
            let report = conjecture_experiment(cfg.trials, alpha, beta, budget, seed)?;
            report.write_csv(&mut w, first)?;
            first = false;
            summary.push_str(&report.summary());
            summary.push('\n');
        }
    }
    print!("{summary}");
    let mut outputs = Vec::new();
    write(cfg, "conjecture.csv", &finish_csv(w)?, &mut outputs)?;
    write(cfg, "conjecture.txt", &summary, &mut outputs)?;
    finish(cfg, "conjecture", outputs)
}

/// Median and interquartile range (linear interpolation between order statistics).
pub fn median_iqr(values: &[f64]) -> (f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let pos = p * (v.len() - 1) as f64;
        let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
        v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
    };
    (q(0.5), q(0.75) - q(0.25))
}

#[derive(Debug, Clone)]
pub struct TrialError {
    pub n_hat: usize,
    pub method: &'static str,
    pub trial: usize,
    pub error: f64,
}

/// Relative error of every method on every trial at one signal length.
pub fn evaluate_length(cfg: &ExperimentConfig, n_hat: usize) -> Result<Vec<TrialError>> {
    let signals = cfg.signals(n_hat, cfg.seeds)?;
    let profile = cfg.profile(n_hat)?;
    let constants = cfg.constants(n_hat)?;
    let per_trial: Vec<Vec<TrialError>> = signals
        .par_iter()
        .enumerate()
        .map(|(t, signal)| {
            let mp = method_plans(&profile, &constants, n_hat, &planner_options(cfg, cfg.matrix_seed(n_hat, t)))?;
            mp.plans
                .iter()
                .map(|(name, plan)| {
                    let (error, _) = evaluate_plan(signal, plan, &profile, &constants, cfg.basis)?;
                    Ok(TrialError {
                        n_hat,
                        method: name,
                        trial: t,
                        error,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}

pub fn cmd_evaluate(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let mut runs = Vec::new();
    for &n_hat in &cfg.n_hat {
        runs.extend(evaluate_length(cfg, n_hat)?);
    }
    runs.sort_by(|a, b| (a.n_hat, a.method, a.trial).cmp(&(b.n_hat, b.method, b.trial)));

    let mut raw = csv::Writer::from_writer(Vec::new());
    raw.write_record(["n_hat", "method", "trial", "relative_error"])?;
    for r in &runs {
        raw.write_record([r.n_hat.to_string(), r.method.to_string(), r.trial.to_string(), r.error.to_string()])?;
    }
    let mut agg = csv::Writer::from_writer(Vec::new());
    agg.write_record(["n_hat", "method", "median_error", "iqr", "trials"])?;
    let mut i = 0;
    while i < runs.len() {
        let j = runs[i..]
            .iter()
            .position(|r| (r.n_hat, r.method) != (runs[i].n_hat, runs[i].method))
            .map_or(runs.len(), |p| i + p);
        let errs: Vec<f64> = runs[i..j].iter().map(|r| r.error).collect();
        let (median, iqr) = median_iqr(&errs);
        agg.write_record([
            runs[i].n_hat.to_string(),
            runs[i].method.to_string(),
            median.to_string(),
            iqr.to_string(),
            errs.len().to_string(),
        ])?;
        i = j;
    }
    let mut outputs = Vec::new();
    let summary = finish_csv(agg)?;
    print!("{summary}");
    write(cfg, "evaluate.csv", &summary, &mut outputs)?;
    write(cfg, "evaluate_runs.csv", &finish_csv(raw)?, &mut outputs)?;
    finish(cfg, "evaluate", outputs)
}
