//! Sign check of the derivative of the per-node length cap with respect to the
//! node's own energy.
//!
//! With `S = E_j + rest`, `b = E_j / c4` and `x = E_j kappa / S`, the cap
//! `ln(1 - b) / ln(1 - x)` has derivative `left - right` where
//! `left = 1 / (c4 (1 - b) |ln(1 - x)|)` and
//! `right = |ln(1 - b)| |E_j kappa / S^2 - kappa / S| / ((1 - x) ln^2(1 - x))`.
//! A positive difference means richer nodes tolerate more projections, so
//! only the poorest node's constraint can bind.

use rand::Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::finish_csv;
use crate::rng::{derive_seed, seeded};

/// Smallest `kappa` accepted by [`derivative_parts`].
pub const MIN_KAPPA: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeSample {
    /// `E_j / sum(E)`.
    pub ratio: f64,
    pub kappa: f64,
    /// `E_j / c4`.
    pub budget_ratio: f64,
    pub left: f64,
    pub right: f64,
    /// Sign of `left - right`: 1, 0 or -1.
    pub sign: i8,
}

impl DerivativeSample {
    pub fn margin(&self) -> f64 {
        self.left - self.right
    }
}

/// `(left, right)` for node energy `energy`, total `total` and per-sample cost `c4`.
pub fn derivative_parts(energy: f64, kappa: f64, total: f64, c4: f64) -> Result<(f64, f64)> {
    if !(energy > 0.0 && energy < c4) {
        return Err(Error::invalid(format!(
            "energy {energy} must lie strictly between 0 and c4 = {c4}"
        )));
    }
    if !(MIN_KAPPA..=1.0).contains(&kappa) {
        return Err(Error::invalid(format!("kappa = {kappa} outside [{MIN_KAPPA}, 1]")));
    }
    let x = energy * kappa / total;
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::invalid(format!("E_j kappa / sum(E) = {x} outside (0, 1)")));
    }
    let b = energy / c4;
    let lx = (-x).ln_1p();
    let lb = (-b).ln_1p();
    let left = 1.0 / (c4 * (1.0 - b) * lx.abs());
    let right = lb.abs() * (energy * kappa / (total * total) - kappa / total).abs() / ((1.0 - x) * lx * lx);
    Ok((left, right))
}

/// Evaluates the decomposition at share `ratio`, `kappa` and `E_j / c4 = budget_ratio` with `c4 = 1`.
pub fn derivative_sample(ratio: f64, kappa: f64, budget_ratio: f64) -> Result<DerivativeSample> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::invalid(format!("share {ratio} outside (0, 1]")));
    }
    let energy = budget_ratio;
    let (left, right) = derivative_parts(energy, kappa, energy / ratio, 1.0)?;
    let d = left - right;
    Ok(DerivativeSample {
        ratio,
        kappa,
        budget_ratio,
        left,
        right,
        sign: if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        },
    })
}

/// `nodes` i.i.d. Beta(alpha, beta) draws used as raw energy shares.
pub fn sample_beta_profiles(alpha: f64, beta: f64, nodes: usize, seed: u64) -> Result<Vec<f64>> {
    let dist = beta_dist(alpha, beta)?;
    let mut rng = seeded(seed);
    Ok((0..nodes).map(|_| dist.sample(&mut rng)).collect())
}

/// Beta draws rescaled to sum to one.
pub fn normalized_beta_profile(alpha: f64, beta: f64, nodes: usize, seed: u64) -> Result<Vec<f64>> {
    let raw = sample_beta_profiles(alpha, beta, nodes, seed)?;
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(Error::invalid("beta draws summed to zero"));
    }
    Ok(raw.into_iter().map(|v| v / total).collect())
}

fn beta_dist(alpha: f64, beta: f64) -> Result<Beta<f64>> {
    if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(Error::invalid(format!("beta shapes ({alpha}, {beta}) must be positive")));
    }
    Beta::new(alpha, beta).map_err(|e| Error::invalid(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureReport {
    pub alpha: f64,
    pub beta: f64,
    pub budget_ratio: f64,
    pub seed: u64,
    pub samples: Vec<DerivativeSample>,
}

impl ConjectureReport {
    pub fn trials(&self) -> usize {
        self.samples.len()
    }

    pub fn non_positive(&self) -> usize {
        self.samples.iter().filter(|s| s.sign <= 0).count()
    }

    pub fn min_margin(&self) -> f64 {
        self.samples.iter().map(|s| s.margin()).fold(f64::INFINITY, f64::min)
    }

    pub fn summary(&self) -> String {
        format!(
            "beta({}, {}) E/c4={}: {} trials, {} non-positive, min(left-right)={:.6e}",
            self.alpha,
            self.beta,
            self.budget_ratio,
            self.trials(),
            self.non_positive(),
            self.min_margin()
        )
    }

    pub fn write_csv(&self, w: &mut csv::Writer<impl std::io::Write>, header: bool) -> Result<()> {
        if header {
            w.write_record(["alpha", "beta", "trial", "ratio", "kappa", "left", "right", "sign", "budget_ratio"])?;
        }
        for (t, s) in self.samples.iter().enumerate() {
            w.write_record([
                self.alpha.to_string(),
                self.beta.to_string(),
                t.to_string(),
                s.ratio.to_string(),
                s.kappa.to_string(),
                s.left.to_string(),
                s.right.to_string(),
                s.sign.to_string(),
                s.budget_ratio.to_string(),
            ])?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        self.write_csv(&mut w, true)?;
        finish_csv(w)
    }
}

/// Draws the share from Beta(alpha, beta) and `kappa` from U(0, 1) for each trial,
/// evaluating the derivative decomposition at the fixed `budget_ratio`.
pub fn conjecture_experiment(
    trials: usize,
    alpha: f64,
    beta: f64,
    budget_ratio: f64,
    seed: u64,
) -> Result<ConjectureReport> {
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    if !(budget_ratio > 0.0 && budget_ratio < 1.0) {
        return Err(Error::invalid(format!("E/c4 = {budget_ratio} outside (0, 1)")));
    }
    let dist = beta_dist(alpha, beta)?;
    let samples = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = seeded(derive_seed(seed, t as u64));
            let ratio = loop {
                let r: f64 = dist.sample(&mut rng);
                if r > 0.0 && r < 1.0 {
                    break r;
                }
            };
            let kappa = loop {
                let k: f64 = rng.random();
                if k >= MIN_KAPPA {
                    break k;
                }
            };
            derivative_sample(ratio, kappa, budget_ratio)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConjectureReport {
        alpha,
        beta,
        budget_ratio,
        seed,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parts_match_hand_evaluation() {
        // E = 0.5, kappa = 0.3, S = 2, c4 = 1
        let (l, r) = derivative_parts(0.5, 0.3, 2.0, 1.0).unwrap();
        let lx = (1.0f64 - 0.075).ln();
        assert!((l - 1.0 / (0.5 * lx.abs())).abs() < 1e-12);
        let expected_r = 0.5f64.ln().abs() * (0.5 * 0.3 / 4.0 - 0.15f64).abs() / (0.925 * lx * lx);
        assert!((r - expected_r).abs() < 1e-12);
    }

    #[test]
    fn domain_violations_rejected() {
        assert!(derivative_parts(1.0, 0.3, 2.0, 1.0).is_err());
        assert!(derivative_parts(0.5, 1e-10, 2.0, 1.0).is_err());
        assert!(derivative_parts(0.5, 1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn uniform_beta_stays_in_unit_interval() {
        let v = sample_beta_profiles(1.0, 1.0, 2000, 3).unwrap();
        assert!(v.iter().all(|&x| (0.0..=1.0).contains(&x)));
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        assert!((mean - 0.5).abs() < 0.03);
        assert!(sample_beta_profiles(0.0, 1.0, 3, 1).is_err());
    }

    #[test]
    fn skew_direction() {
        let right = sample_beta_profiles(2.0, 20.0, 1000, 1).unwrap();
        let left = sample_beta_profiles(20.0, 2.0, 1000, 1).unwrap();
        let m = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(m(&right) < 0.15 && m(&left) > 0.85);
    }

    #[test]
    fn experiment_replays() {
        let a = conjecture_experiment(50, 2.0, 20.0, 0.5, 9).unwrap();
        let b = conjecture_experiment(50, 2.0, 20.0, 0.5, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.non_positive(), 0);
        let csv = a.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 51);
    }
}
