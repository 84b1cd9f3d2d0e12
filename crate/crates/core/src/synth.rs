//! Synthetic compressible fields with a known power-law coefficient decay.
//!
//! The `pi`-th largest coefficient has magnitude `R pi^(-1/s)` and a random
//! sign. Coefficients are assigned coarse to fine: the largest goes to index
//! 0, the next to the band `[1, 2)`, the next two to `[2, 4)` in random order,
//! and so on through the dyadic bands. For both supported bases low indices
//! are the smooth components, so the field spreads its energy over all
//! entries instead of concentrating it on a few.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded};
use crate::signal::Signal;
use crate::transform::{peak_to_total_check, Basis, TransformBasis};

/// Resampling budget for the peak-to-total check.
pub const MAX_ATTEMPTS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthSpec {
    pub n_hat: usize,
    pub nodes: usize,
    pub s: f64,
    pub r: f64,
    pub basis: Basis,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSignal {
    pub signal: Signal,
    pub theta: Vec<f64>,
    /// Peak-to-total ratio of the accepted field.
    pub ratio: f64,
    pub attempts: usize,
}

/// Dyadic band boundaries `[0,1), [1,2), [2,4), ...` truncated to `n`.
fn bands(n: usize) -> Vec<(usize, usize)> {
    let mut out = vec![(0, 1.min(n))];
    let mut lo = 1;
    while lo < n {
        let hi = (2 * lo).min(n);
        out.push((lo, hi));
        lo = hi;
    }
    out
}

fn draw_coefficients(spec: &SynthSpec, rng: &mut impl Rng) -> Vec<f64> {
    let mut positions = Vec::with_capacity(spec.n_hat);
    for (lo, hi) in bands(spec.n_hat) {
        let mut band: Vec<usize> = (lo..hi).collect();
        band.shuffle(rng);
        positions.extend(band);
    }
    let mut theta = vec![0.0; spec.n_hat];
    for (p, &pos) in positions.iter().enumerate() {
        let mag = spec.r * ((p + 1) as f64).powf(-1.0 / spec.s);
        theta[pos] = if rng.random::<bool>() { mag } else { -mag };
    }
    theta
}

/// Generates a field of `n_hat` readings laid out as `n_hat / nodes` instants by `nodes` nodes.
///
/// The field is redrawn until `||u||_inf / ||u||_2 <= ln N̂ / sqrt(N̂)`.
pub fn synth_signal(spec: &SynthSpec) -> Result<SynthSignal> {
    if !(spec.s > 0.0 && spec.s <= 1.0) {
        return Err(Error::invalid(format!("compressibility s = {} outside (0, 1]", spec.s)));
    }
    if !(spec.r > 0.0 && spec.r.is_finite()) {
        return Err(Error::invalid("scale R must be positive"));
    }
    if spec.nodes == 0 || !spec.n_hat.is_multiple_of(spec.nodes) {
        return Err(Error::invalid(format!(
            "signal length {} is not a multiple of the node count {}",
            spec.n_hat, spec.nodes
        )));
    }
    let basis = TransformBasis::new(spec.basis, spec.n_hat)?;
    let mut last = f64::NAN;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = seeded(derive_seed(spec.seed, attempt as u64));
        let theta = draw_coefficients(spec, &mut rng);
        let u = basis.inverse(&theta)?;
        let check = peak_to_total_check(&u, 1.0)?;
        last = check.ratio;
        if check.pass {
            let signal = Signal::from_vectorized(spec.n_hat / spec.nodes, spec.nodes, u)?;
            return Ok(SynthSignal {
                signal,
                theta,
                ratio: check.ratio,
                attempts: attempt + 1,
            });
        }
    }
    Err(Error::PeakToTotal {
        attempts: MAX_ATTEMPTS,
        ratio: last,
    })
}

/// Closed-form best-`k` error fraction of the generator:
/// `sum_{pi > k} pi^(-2/s) / sum_pi pi^(-2/s)`.
pub fn best_k_fraction(n_hat: usize, s: f64, k: usize) -> f64 {
    let terms = (1..=n_hat).map(|p| (p as f64).powf(-2.0 / s));
    let (mut head, mut tail) = (0.0, 0.0);
    for (i, t) in terms.enumerate() {
        if i < k {
            head += t;
        } else {
            tail += t;
        }
    }
    tail / (head + tail)
}
