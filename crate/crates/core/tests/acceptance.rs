//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use east_plus::analysis::{conjecture_experiment, derivative_sample, sample_beta_profiles};
use east_plus::cli::commands::median_iqr;
use east_plus::decoder::{error_for_projections, partition, reconstruct, theoretical_projections};
use east_plus::netsim::{evaluate_plan, run};
use east_plus::planner::{
    east_baseline_plan, east_equality_plan, east_plus_plan, feasibility_check, fixed_baselines, kappa_min,
    PlannerOptions,
};
use east_plus::projection::{project, sampling_probabilities};
use east_plus::rng::{derive_seed, seeded};
use east_plus::synth::{best_k_fraction, synth_signal, SynthSpec};
use east_plus::transform::{best_k_approx, mu_bound, peak_to_total_check, peak_to_total_ratio, TransformBasis};
use east_plus::{relative_error, Basis, EnergyProfile, ModelConstants, SamplingPlan, Signal};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, var)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// ---------------------------------------------------------------------------
// 1. Inner-product moments of the energy-weighted projection.

fn moments() -> Outcome {
    const TRIALS: usize = 100_000;
    let n = 16;
    let ell = 16;
    let energies = sample_beta_profiles(20.0, 2.0, n, 11).unwrap();
    let profile = EnergyProfile::new(energies).unwrap();
    let g = sampling_probabilities(&profile, 0.8).unwrap();
    let base = SamplingPlan::energy_weighted(&profile, ell, 0.8, 0).unwrap();

    let mut rng = seeded(5);
    let mut rand_vec = || -> Vec<f64> { (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect() };
    let u1 = rand_vec();
    let v1 = rand_vec();
    let u2: Vec<f64> = (0..n).map(|q| if q % 3 == 0 { 2.0 } else { 0.1 * q as f64 }).collect();
    let pairs = vec![(u1.clone(), v1), (u2.clone(), u2), (u1, rand_vec())];

    let mut pass = true;
    let mut details = Vec::new();
    for (p, (u, v)) in pairs.iter().enumerate() {
        let samples: Vec<f64> = (0..TRIALS)
            .into_par_iter()
            .map(|t| {
                let plan = base.clone().with_seed(derive_seed(1000 + p as u64, t as u64));
                dot(&project(u, &plan).unwrap(), &project(v, &plan).unwrap())
            })
            .collect();
        let (mean, var) = mean_var(&samples);
        let uv = dot(u, v);
        let cross: f64 = (0..n).map(|j| (1.0 / g[j] - 3.0) * u[j] * u[j] * v[j] * v[j]).sum();
        let theory = (uv * uv + dot(u, u) * dot(v, v) + cross) / ell as f64;
        let se = (var / TRIALS as f64).sqrt();
        let mean_ok = (mean - uv).abs() <= 4.0 * se;
        let var_rel = (var - theory).abs() / theory;
        let var_ok = var_rel <= 0.05;
        pass &= mean_ok && var_ok;
        details.push(format!(
            "pair{}: |mean-uv|/se={:.2} var rel.dev={:.3}",
            p + 1,
            (mean - uv).abs() / se,
            var_rel
        ));
    }
    outcome(pass, details.join("; "))
}

// ---------------------------------------------------------------------------
// 2. Reconstruction error against the (1 + eps) eta bound.

fn error_bound() -> Outcome {
    const RUNS: usize = 200;
    let (n_hat, nodes, k, gamma, c, s) = (256, 8, 8, 0.5, 0.9, 0.8);
    let ell = 8192;
    let eta = best_k_fraction(n_hat, s, k);
    let signals: Vec<Signal> = (0..RUNS)
        .map(|t| {
            synth_signal(&SynthSpec {
                n_hat,
                nodes,
                s,
                r: 1.0,
                basis: Basis::Haar,
                seed: derive_seed(2, t as u64),
            })
            .unwrap()
            .signal
        })
        .collect();
    let mu = signals
        .iter()
        .map(|sig| peak_to_total_ratio(sig.as_vector()).unwrap())
        .fold(0.0, f64::max);
    let constants = ModelConstants::with_sample_energy(k, gamma, eta, c, mu, 1.0).unwrap();
    let g = vec![1.0 / nodes as f64; nodes];
    let max_inv = nodes as f64;
    let eps = error_for_projections(ell as f64, &constants, n_hat, max_inv);
    let ell_back = theoretical_projections(eps, &constants, n_hat, max_inv);
    let basis = TransformBasis::new(Basis::Haar, n_hat).unwrap();
    let part = partition(ell, gamma, c, n_hat).unwrap();

    let errors: Vec<f64> = signals
        .par_iter()
        .enumerate()
        .map(|(t, sig)| {
            let plan = SamplingPlan::from_probabilities(ell, g.clone(), derive_seed(3, t as u64)).unwrap();
            let x = project(sig.as_vector(), &plan).unwrap();
            let u_hat = reconstruct(&x, &plan, &basis, k, &part).unwrap();
            relative_error(sig.as_vector(), &u_hat).unwrap()
        })
        .collect();
    let violations = errors.iter().filter(|&&e| e > (1.0 + eps) * eta).count();
    let frac = violations as f64 / RUNS as f64;
    let limit = (n_hat as f64).powf(-gamma) + 0.10;
    let at_one = errors.iter().filter(|&&e| e > 2.0 * eta).count() as f64 / RUNS as f64;
    let (median, _) = median_iqr(&errors);
    outcome(
        frac <= limit && (ell_back - ell as f64).abs() < 1e-6 * ell as f64,
        format!(
            "ell={ell} eps={eps:.2} eta={eta:.4} violations={frac:.3} (limit {limit:.4}); \
             median err/eta={:.3}; info: fraction above 2*eta={at_one:.3}",
            median / eta
        ),
    )
}

// ---------------------------------------------------------------------------
// 3. Reduced 1-D planner against an exhaustive 2-D grid.

fn grid_objective(profile: &EnergyProfile, constants: &ModelConstants, n_hat: usize) -> f64 {
    let instants = (n_hat / profile.len()) as f64;
    let c4 = constants.c4();
    let total = profile.total();
    let feasible = |ell: usize, kappa: f64| {
        profile.energies().iter().all(|&e| {
            let g = kappa * e / total;
            instants * (1.0 - (1.0 - g).powi(ell as i32)) * c4 <= e * (1.0 + 1e-9)
        })
    };
    let k_min = total / (n_hat as f64 * profile.min());
    let obj = |ell: usize, kappa: f64| {
        constants.c1() * (n_hat as f64).ln() / ell as f64 * (2.0 + constants.c2() * total / (profile.min() * kappa))
    };
    let mut best = f64::INFINITY;
    let mut i = 0;
    loop {
        let kappa = k_min + i as f64 * 1e-4;
        if kappa > 1.0 {
            break;
        }
        i += 1;
        if !feasible(1, kappa) {
            continue;
        }
        // feasibility is monotone in ell: largest feasible ell by doubling and bisection
        let mut hi = 1usize;
        while feasible(hi * 2, kappa) {
            hi *= 2;
        }
        let (mut lo, mut top) = (hi, hi * 2);
        while top - lo > 1 {
            let mid = (lo + top) / 2;
            if feasible(mid, kappa) {
                lo = mid;
            } else {
                top = mid;
            }
        }
        best = best.min(obj(lo, kappa));
    }
    best
}

fn planner_optimality() -> Outcome {
    let start = Instant::now();
    let (nodes, n_hat) = (8, 2048);
    let instants = n_hat / nodes;
    let constants = ModelConstants::with_sample_energy(8, 0.5, 0.1, 0.5, 0.25, 1.0).unwrap();
    let opts = PlannerOptions {
        max_projections: 10_000_000,
        ..Default::default()
    };
    let results: Vec<(f64, f64, bool, f64)> = (0..20)
        .into_par_iter()
        .map(|p| {
            let (a, b) = if p < 10 { (2.0, 20.0) } else { (20.0, 2.0) };
            let rates = sample_beta_profiles(a, b, nodes, derive_seed(4, p as u64)).unwrap();
            let profile = EnergyProfile::from_rates(&rates, instants).unwrap();
            let r = east_plus_plan(&profile, &constants, n_hat, &opts).unwrap();
            let grid = grid_objective(&profile, &constants, n_hat);
            let feas = feasibility_check(&r.plan, &profile, constants.c4(), instants);
            let j = profile.argmin();
            let slack_ok = feas.slack[j] <= 1e-6 * profile.energy(j);
            let kappa_ok = r.plan.kappa >= kappa_min(&profile, n_hat) - 1e-15;
            ((r.objective - grid).abs() / grid, r.objective / grid, feas.pass && slack_ok && kappa_ok, feas.slack[j] / profile.energy(j))
        })
        .collect();
    let elapsed = start.elapsed().as_secs_f64();
    let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let ratio_min = results.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let all_feasible = results.iter().all(|r| r.2);
    let worst_slack = results.iter().map(|r| r.3).fold(f64::NEG_INFINITY, f64::max);
    outcome(
        worst <= 0.01 && all_feasible && elapsed < 30.0,
        format!(
            "max |obj-grid|/grid={worst:.2e} (min obj/grid {ratio_min:.6}); feasible+binding={all_feasible} \
             (max slack/E1 {worst_slack:.1e}); {elapsed:.1}s"
        ),
    )
}

// ---------------------------------------------------------------------------
// 4. Derivative sign experiment and finite-difference oracle.

fn cap_of_energy(energy: f64, rest: f64, kappa: f64) -> f64 {
    (1.0 - energy).ln() / (1.0 - energy * kappa / (energy + rest)).ln()
}

fn conjecture() -> Outcome {
    let mut non_positive = 0;
    let mut runs = Vec::new();
    for (a, b) in [(2.0, 20.0), (20.0, 2.0)] {
        for budget in [0.1, 0.5, 0.9] {
            let rep = conjecture_experiment(1000, a, b, budget, derive_seed(6, (a * 100.0 + budget * 10.0) as u64)).unwrap();
            non_positive += rep.non_positive();
            runs.push(format!("({a},{b},{budget}):{:.2e}", rep.min_margin()));
        }
    }
    // finite-difference oracle at random valid points
    let mut rng = seeded(7);
    let (mut agree, mut counted) = (0, 0);
    for _ in 0..1000 {
        let ratio: f64 = rng.random_range(0.001..0.999);
        let kappa: f64 = rng.random_range(1e-6..1.0);
        let budget: f64 = rng.random_range(0.01..0.99);
        let rest = budget / ratio - budget;
        let h = 1e-6 * budget;
        let d = (cap_of_energy(budget + h, rest, kappa) - cap_of_energy(budget - h, rest, kappa)) / (2.0 * h);
        if d.abs() < 1e-12 {
            continue;
        }
        let s = derivative_sample(ratio, kappa, budget).unwrap();
        counted += 1;
        if (d > 0.0) == (s.sign > 0) {
            agree += 1;
        }
    }
    let rate = agree as f64 / counted as f64;
    outcome(
        non_positive == 0 && rate >= 0.999,
        format!(
            "non-positive={non_positive} over 6x1000 trials; min margins {}; fd agreement {agree}/{counted}",
            runs.join(" ")
        ),
    )
}

// ---------------------------------------------------------------------------
// 5. Distributed/centralized equivalence and energy neutrality.

fn distributed() -> Outcome {
    let mut rng = seeded(8);
    let mut identical = 0;
    for t in 0..100 {
        let nodes = rng.random_range(1..7usize);
        let instants = rng.random_range(1..17usize);
        let energies: Vec<f64> = (0..nodes).map(|_| rng.random_range(0.1..2.0)).collect();
        let profile = EnergyProfile::new(energies).unwrap();
        let kappa = rng.random_range(0.05..1.0);
        let ell = rng.random_range(1..60usize);
        let plan = SamplingPlan::energy_weighted(&profile, ell, kappa, derive_seed(9, t)).unwrap();
        let values: Vec<f64> = (0..nodes * instants).map(|_| rng.random_range(-5.0..5.0)).collect();
        let signal = Signal::from_vectorized(instants, nodes, values).unwrap();
        let sim = run(&signal, &plan, &profile, 0.3).unwrap();
        let central = project(signal.as_vector(), &plan).unwrap();
        if sim.x.len() == central.len() && sim.x.iter().zip(&central).all(|(a, b)| a.to_bits() == b.to_bits()) {
            identical += 1;
        }
    }

    let rates = [1.0, 0.95, 1.05, 1.0, 0.6, 0.9, 1.1, 1.0];
    let n_hat = 256;
    let instants = n_hat / rates.len();
    let profile = EnergyProfile::from_rates(&rates, instants).unwrap();
    let c4 = 1.1 / 0.99;
    let constants = ModelConstants::with_sample_energy(8, 0.5, 0.1, 0.9, 0.1, c4).unwrap();
    let plan = east_plus_plan(&profile, &constants, n_hat, &PlannerOptions::default()).unwrap();
    let signal = Signal::from_vectorized(instants, rates.len(), vec![1.0; n_hat]).unwrap();
    let consumed: Vec<Vec<f64>> = (0..100u64)
        .into_par_iter()
        .map(|s| {
            let p = plan.plan.clone().with_seed(derive_seed(10, s));
            run(&signal, &p, &profile, c4).unwrap().ledger.consumed_all()
        })
        .collect();
    let mut neutral = true;
    let mut worst = f64::NEG_INFINITY;
    for j in 0..rates.len() {
        let col: Vec<f64> = consumed.iter().map(|c| c[j]).collect();
        let (m, var) = mean_var(&col);
        let bound = profile.energy(j) + 3.0 * (var / 100.0).sqrt();
        neutral &= m <= bound;
        worst = worst.max(m / profile.energy(j));
    }
    outcome(
        identical == 100 && neutral,
        format!("bit-identical {identical}/100; energy-neutral within 3 s.e.: {neutral} (max mean consumed/E = {worst:.4})"),
    )
}

// ---------------------------------------------------------------------------
// 6 and 7. Reconstruction comparisons on synthetic fields.

const SEEDS: usize = 20;

struct Scenario {
    rates: Vec<f64>,
    c4: f64,
    c: f64,
}

impl Scenario {
    fn constants(&self, n_hat: usize) -> ModelConstants {
        let (k, s) = (8, 0.8);
        ModelConstants::with_sample_energy(k, 0.5, best_k_fraction(n_hat, s, k), self.c, mu_bound(n_hat, s), self.c4)
            .unwrap()
    }

    fn signal(&self, n_hat: usize, t: usize) -> Signal {
        synth_signal(&SynthSpec {
            n_hat,
            nodes: self.rates.len(),
            s: 0.8,
            r: 1.0,
            basis: Basis::Haar,
            seed: derive_seed(derive_seed(12, n_hat as u64), t as u64),
        })
        .unwrap()
        .signal
    }

    /// Median relative error of each named plan builder over the seeds.
    fn medians(
        &self,
        n_hat: usize,
        build: impl Fn(&EnergyProfile, &ModelConstants, u64) -> Vec<SamplingPlan> + Sync,
    ) -> Vec<f64> {
        let profile = EnergyProfile::from_rates(&self.rates, n_hat / self.rates.len()).unwrap();
        let constants = self.constants(n_hat);
        let per_seed: Vec<Vec<f64>> = (0..SEEDS)
            .into_par_iter()
            .map(|t| {
                let signal = self.signal(n_hat, t);
                build(&profile, &constants, derive_seed(13, (n_hat * 1000 + t) as u64))
                    .iter()
                    .map(|plan| evaluate_plan(&signal, plan, &profile, &constants, Basis::Haar).unwrap().0)
                    .collect()
            })
            .collect();
        (0..per_seed[0].len())
            .map(|m| median_iqr(&per_seed.iter().map(|r| r[m]).collect::<Vec<_>>()).0)
            .collect()
    }
}

fn versus_baselines() -> Outcome {
    let scenario = Scenario {
        rates: vec![1.0, 0.95, 1.05, 1.0, 0.25, 0.9, 1.1, 1.0],
        c4: 0.25 / 0.99,
        c: 0.9,
    };
    let lengths = [64usize, 128, 256, 512, 1024, 2048];
    let mut optimal = Vec::new();
    let mut baselines = Vec::new();
    for &n_hat in &lengths {
        let with_baselines = n_hat == lengths[0];
        let medians = scenario.medians(n_hat, |profile, constants, seed| {
            let opts = PlannerOptions {
                seed,
                ..Default::default()
            };
            let best = east_plus_plan(profile, constants, n_hat, &opts).unwrap();
            let mut plans = vec![best.plan.clone()];
            if with_baselines {
                for (ell, kappa) in fixed_baselines(&best) {
                    plans.push(east_baseline_plan(ell, kappa, profile, constants, n_hat, seed).unwrap().plan);
                }
            }
            plans
        });
        optimal.push(medians[0]);
        if with_baselines {
            baselines = medians[1..].to_vec();
        }
    }
    let best_baseline = baselines.iter().copied().fold(f64::INFINITY, f64::min);
    let monotone = optimal.windows(2).all(|w| w[1] <= w[0]);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ");
    outcome(
        optimal[0] <= best_baseline && monotone,
        format!(
            "N=64 optimal {:.4} vs baselines [{}]; optimal medians N=64..2048 [{}]",
            optimal[0],
            fmt(&baselines),
            fmt(&optimal)
        ),
    )
}

fn equality() -> Outcome {
    let scenario = Scenario {
        rates: vec![1.0, 0.95, 1.05, 1.0, 0.6, 0.9, 1.1, 1.0],
        c4: 1.1 / 0.99,
        c: 0.9,
    };
    let n_hat = 2048;
    let instants = n_hat / scenario.rates.len();
    let profile = EnergyProfile::from_rates(&scenario.rates, instants).unwrap();
    let constants = scenario.constants(n_hat);
    let ell = east_plus_plan(&profile, &constants, n_hat, &PlannerOptions::default())
        .unwrap()
        .plan
        .ell;
    let all_active = east_equality_plan(&profile, ell, scenario.c4, instants, 0).unwrap();
    let slack = feasibility_check(&all_active, &profile, scenario.c4, instants).slack;
    let worst = slack.iter().map(|s| s.abs()).fold(0.0, f64::max);

    let medians = scenario.medians(n_hat, |profile, constants, seed| {
        let opts = PlannerOptions {
            seed,
            ..Default::default()
        };
        vec![
            east_plus_plan(profile, constants, n_hat, &opts).unwrap().plan,
            east_equality_plan(profile, ell, constants.c4(), instants, seed).unwrap(),
        ]
    });
    let rel = (medians[1] - medians[0]).abs() / medians[0];
    outcome(
        worst <= 1e-12 && rel <= 0.10,
        format!(
            "ell={ell} max |slack|={worst:.1e}; median error optimal {:.4} vs all-active {:.4} (rel. diff {rel:.3})",
            medians[0], medians[1]
        ),
    )
}

// ---------------------------------------------------------------------------
// 8. Transform suite.

fn transforms() -> Outcome {
    let mut rng = seeded(14);
    let mut notes = Vec::new();
    let mut pass = true;

    let mut parseval_worst: f64 = 0.0;
    for kind in [Basis::Haar, Basis::Dct] {
        for n in [16usize, 256] {
            let t = TransformBasis::new(kind, n).unwrap();
            for _ in 0..1000 {
                let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let theta = t.forward(&u).unwrap();
                let (a, b) = (dot(&u, &u).sqrt(), dot(&theta, &theta).sqrt());
                parseval_worst = parseval_worst.max((a - b).abs() / a);
                let back = t.inverse(&theta).unwrap();
                let rt = back.iter().zip(&u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                parseval_worst = parseval_worst.max(rt / a);
            }
        }
    }
    pass &= parseval_worst <= 1e-9;
    notes.push(format!("parseval/round-trip {parseval_worst:.1e}"));

    let mut ortho_worst: f64 = 0.0;
    for kind in [Basis::Haar, Basis::Dct] {
        for n in [8usize, 64, 1024] {
            let m = TransformBasis::new(kind, n).unwrap().matrix();
            let gram: Vec<f64> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut worst: f64 = 0.0;
                    for j in 0..n {
                        let s: f64 = (0..n).map(|q| m[q][i] * m[q][j]).sum();
                        let target = if i == j { 1.0 } else { 0.0 };
                        worst = worst.max((s - target).abs());
                    }
                    worst
                })
                .collect();
            ortho_worst = ortho_worst.max(gram.into_iter().fold(0.0, f64::max));
        }
    }
    pass &= ortho_worst <= 1e-10;
    notes.push(format!("orthonormality {ortho_worst:.1e}"));

    let mut bestk_ok = true;
    for trial in 0..20 {
        let n = 12 + trial % 5;
        let theta: Vec<f64> = (0..n).map(|_| (rng.random_range(-4i32..5) as f64) * 0.5).collect();
        for k in 1..=n {
            let kept = best_k_approx(&theta, k);
            let energy: f64 = kept.iter().map(|v| v * v).sum();
            let mut best: f64 = 0.0;
            for mask in 0u32..(1 << n) {
                if mask.count_ones() as usize == k {
                    let e: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| theta[i] * theta[i]).sum();
                    best = best.max(e);
                }
            }
            bestk_ok &= (energy - best).abs() <= 1e-12;
        }
    }
    pass &= bestk_ok;
    notes.push(format!("best-k brute force {bestk_ok}"));

    let haar = TransformBasis::new(Basis::Haar, 4).unwrap().forward(&[1.0; 4]).unwrap();
    let haar_ok = haar.iter().zip([2.0, 0.0, 0.0, 0.0]).all(|(a, b)| (a - b).abs() < 1e-12);
    pass &= haar_ok;
    notes.push(format!("haar constant {haar_ok}"));

    let mut ptt_ok = true;
    for n in [64usize, 256, 2048] {
        ptt_ok &= peak_to_total_check(&vec![0.3; n], 1.0).unwrap().pass;
        for t in 0..10 {
            let sig = synth_signal(&SynthSpec {
                n_hat: n,
                nodes: 1,
                s: 1.0,
                r: 1.0,
                basis: Basis::Haar,
                seed: t,
            })
            .unwrap();
            ptt_ok &= peak_to_total_check(sig.signal.as_vector(), 1.0).unwrap().pass;
        }
    }
    pass &= ptt_ok;
    notes.push(format!("peak-to-total envelope {ptt_ok}"));
    outcome(pass, notes.join("; "))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("inner-product moments", moments),
        ("reconstruction error bound", error_bound),
        ("planner optimality", planner_optimality),
        ("derivative sign", conjecture),
        ("distributed equivalence and energy neutrality", distributed),
        ("optimal plan versus fixed baselines", versus_baselines),
        ("all-active plan", equality),
        ("transform suite", transforms),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} {name} [{:.1}s] {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
