//! Median reconstruction error of the optimal plan as the horizon grows.

use east_plus::netsim::end_to_end;
use east_plus::planner::PlannerOptions;
use east_plus::rng::derive_seed;
use east_plus::synth::{best_k_fraction, synth_signal, SynthSpec};
use east_plus::transform::mu_bound;
use east_plus::{Basis, EnergyProfile, ModelConstants};

fn main() -> east_plus::Result<()> {
    let rates = [1.0, 0.95, 1.05, 1.0, 0.25, 0.9, 1.1, 1.0];
    let (k, s, c4) = (8, 0.8, 0.25 / 0.99);
    for n_hat in [64, 128, 256, 512, 1024] {
        let profile = EnergyProfile::from_rates(&rates, n_hat / rates.len())?;
        let constants =
            ModelConstants::with_sample_energy(k, 0.5, best_k_fraction(n_hat, s, k), 0.9, mu_bound(n_hat, s), c4)?;
        let mut errors = Vec::new();
        for t in 0..10 {
            let field = synth_signal(&SynthSpec {
                n_hat,
                nodes: rates.len(),
                s,
                r: 1.0,
                basis: Basis::Haar,
                seed: derive_seed(n_hat as u64, t),
            })?;
            let opts = PlannerOptions {
                seed: t,
                ..Default::default()
            };
            errors.push(end_to_end(&field.signal, &profile, &constants, Basis::Haar, &opts)?.relative_error);
        }
        errors.sort_by(f64::total_cmp);
        println!("N={n_hat:<5} median relative error {:.4}", (errors[4] + errors[5]) / 2.0);
    }
    Ok(())
}
