//! Orthonormal transforms, best-k approximation and the peak-to-total check.

use east_plus::transform::{best_k_approx, compressibility_fit, peak_to_total_check};
use east_plus::{Basis, TransformBasis};

fn main() -> east_plus::Result<()> {
    let n = 64;
    let u: Vec<f64> = (0..n).map(|i| 20.0 + 3.0 * (i as f64 / 9.0).sin()).collect();

    for kind in [Basis::Haar, Basis::Dct] {
        let t = TransformBasis::new(kind, n)?;
        let theta = t.forward(&u)?;
        let fit = compressibility_fit(&theta)?;
        for k in [1, 4, 16] {
            let approx = t.inverse(&best_k_approx(&theta, k))?;
            let err = east_plus::relative_error(&u, &approx)?;
            println!("{kind:>4} k={k:<2} relative error {err:.2e}");
        }
        println!("{kind:>4} power-law fit: s={:.3} R={:.3} (valid: {})", fit.s, fit.r, fit.valid);
    }

    let check = peak_to_total_check(&u, 1.0)?;
    println!("peak/total {:.4} <= {:.4}: {}", check.ratio, check.bound, check.pass);
    Ok(())
}
