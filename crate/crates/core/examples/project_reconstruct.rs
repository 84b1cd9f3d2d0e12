//! Projects a synthetic field with an energy-weighted plan and recovers it
//! with the median-of-means decoder.

use east_plus::decoder::{partition, reconstruct};
use east_plus::projection::project;
use east_plus::synth::{synth_signal, SynthSpec};
use east_plus::{relative_error, Basis, EnergyProfile, SamplingPlan, TransformBasis};

fn main() -> east_plus::Result<()> {
    let (n_hat, nodes, k) = (512, 8, 8);
    let field = synth_signal(&SynthSpec {
        n_hat,
        nodes,
        s: 0.8,
        r: 1.0,
        basis: Basis::Haar,
        seed: 42,
    })?;
    let profile = EnergyProfile::from_rates(&[1.0, 0.8, 1.2, 0.5, 1.0, 0.9, 1.1, 0.7], n_hat / nodes)?;
    let basis = TransformBasis::new(Basis::Haar, n_hat)?;

    for ell in [500, 2000, 8000] {
        let plan = SamplingPlan::energy_weighted(&profile, ell, 0.5, 7)?;
        let x = project(field.signal.as_vector(), &plan)?;
        let part = partition(ell, 0.5, 0.9, n_hat)?;
        let u_hat = reconstruct(&x, &plan, &basis, k, &part)?;
        println!(
            "ell={ell:<5} groups={:<2} group size={:<4} relative error {:.4}",
            part.groups,
            part.group_size,
            relative_error(field.signal.as_vector(), &u_hat)?
        );
    }
    Ok(())
}
