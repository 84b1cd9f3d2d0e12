//! Runs the in-network protocol and checks it against the centralized projection.

use east_plus::netsim::{run, MessageKind};
use east_plus::planner::{east_plus_plan, PlannerOptions};
use east_plus::projection::project;
use east_plus::synth::{synth_signal, SynthSpec};
use east_plus::{Basis, EnergyProfile, ModelConstants};

fn main() -> east_plus::Result<()> {
    let (n_hat, nodes) = (256, 8);
    let rates = [1.0, 0.95, 1.05, 1.0, 0.6, 0.9, 1.1, 1.0];
    let c4 = 1.1 / 0.99;
    let profile = EnergyProfile::from_rates(&rates, n_hat / nodes)?;
    let constants = ModelConstants::with_sample_energy(8, 0.5, 0.05, 0.9, 0.3, c4)?;
    let plan = east_plus_plan(&profile, &constants, n_hat, &PlannerOptions::default())?.plan;
    let field = synth_signal(&SynthSpec {
        n_hat,
        nodes,
        s: 0.8,
        r: 1.0,
        basis: Basis::Haar,
        seed: 1,
    })?;

    let sim = run(&field.signal, &plan, &profile, c4)?;
    let central = project(field.signal.as_vector(), &plan)?;
    println!("ell={} bit-identical to centralized: {}", plan.ell, sim.x == central);
    for kind in [MessageKind::SampleRequest, MessageKind::SampleValue, MessageKind::RowScalar] {
        println!("{kind:<15} {}", sim.trace.count(kind));
    }
    for j in 0..nodes {
        println!(
            "node {j}: harvested {:>7.2} consumed {:>7.2} rows {}",
            sim.ledger.harvested[j],
            sim.ledger.consumed(j),
            sim.nodes[j].rows.len()
        );
    }
    Ok(())
}
