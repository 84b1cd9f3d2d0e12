//! Chooses `(ell, kappa)` for a skewed harvesting profile and compares the
//! optimum with fixed baselines and the all-active plan.

use east_plus::planner::{east_baseline_plan, east_equality_plan, east_plus_plan, fixed_baselines, PlannerOptions};
use east_plus::synth::best_k_fraction;
use east_plus::transform::mu_bound;
use east_plus::{EnergyProfile, ModelConstants};

fn main() -> east_plus::Result<()> {
    let rates = [1.0, 0.95, 1.05, 1.0, 0.25, 0.9, 1.1, 1.0];
    let c4 = 0.25 / 0.99;
    let (k, s) = (8, 0.8);

    for n_hat in [64, 256, 1024] {
        let instants = n_hat / rates.len();
        let profile = EnergyProfile::from_rates(&rates, instants)?;
        let constants =
            ModelConstants::with_sample_energy(k, 0.5, best_k_fraction(n_hat, s, k), 0.9, mu_bound(n_hat, s), c4)?;
        let best = east_plus_plan(&profile, &constants, n_hat, &PlannerOptions::default())?;
        println!(
            "N={n_hat:<5} optimum ell={:<6} kappa={:.4} (kappa_min {:.4}) binding node {} objective {:.3e}",
            best.plan.ell, best.plan.kappa, best.kappa_min, best.binding_node, best.objective
        );
        for (ell, kappa) in fixed_baselines(&best) {
            let b = east_baseline_plan(ell, kappa, &profile, &constants, n_hat, 0)?;
            println!("         baseline ell={ell:<6} kappa={kappa:.4} objective {:.3e}", b.objective);
        }
        match east_equality_plan(&profile, best.plan.ell, c4, instants, 0) {
            Ok(eq) => println!("         all-active sum(g)={:.4}", eq.kappa),
            Err(e) => println!("         all-active plan undefined: {e}"),
        }
    }
    Ok(())
}
