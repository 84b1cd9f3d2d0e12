//! Samples the derivative decomposition of the per-node length cap and
//! reports how often it fails to be positive.

use east_plus::analysis::conjecture_experiment;

fn main() -> east_plus::Result<()> {
    for (alpha, beta) in [(2.0, 20.0), (20.0, 2.0)] {
        for budget in [0.1, 0.5, 0.9] {
            let report = conjecture_experiment(2000, alpha, beta, budget, 3)?;
            println!("{}", report.summary());
        }
    }
    Ok(())
}
