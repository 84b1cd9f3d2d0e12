//! Sketching decoder: partitioned median-of-means coefficient estimation,
//! best-k truncation and inverse transform.
//!
//! The `ell` projections are split into `groups` consecutive blocks of
//! `group_size` rows (trailing rows beyond `groups * group_size` are unused).
//! For block `g` and coefficient `i` the group estimate is
//! `z_g[i] = x_g . y_g` with `x_g = Phi_g u / sqrt(group_size)` and
//! `y_g = Phi_g psi_i / sqrt(group_size)`. Since the base station holds
//! `x = Phi u / sqrt(ell)`, all coefficients of one block come from a single
//! transform: `z_g = sqrt(ell)/group_size * Psi^T (sum_r x_r Phi_r)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{EnergyProfile, ModelConstants, SamplingPlan};
use crate::projection::{generate_row, plan_layout};
use crate::transform::{best_k_approx, TransformBasis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PartitionSpec {
    /// Rows per group.
    pub group_size: usize,
    /// Number of groups; always odd.
    pub groups: usize,
    /// The group count is smaller than the high-probability requirement.
    pub below_theory: bool,
}

impl PartitionSpec {
    pub fn new(group_size: usize, groups: usize) -> Result<Self> {
        if group_size == 0 || groups == 0 || groups.is_multiple_of(2) {
            return Err(Error::PartitionMismatch(format!(
                "need group_size >= 1 and an odd group count, got {group_size} x {groups}"
            )));
        }
        Ok(Self {
            group_size,
            groups,
            below_theory: false,
        })
    }

    pub fn used_rows(&self) -> usize {
        self.group_size * self.groups
    }
}

/// Minimum group count for the median step: `ceil(12 (1 + gamma) ln N̂ / c^2)`.
pub fn required_groups(gamma: f64, c: f64, n_hat: usize) -> usize {
    let t = (12.0 * (1.0 + gamma) * (n_hat as f64).ln() / (c * c)).ceil();
    (t.max(1.0)) as usize
}

/// Splits `ell` projections into an odd number of equal groups.
pub fn partition(ell: usize, gamma: f64, c: f64, n_hat: usize) -> Result<PartitionSpec> {
    if ell == 0 {
        return Err(Error::invalid("partition needs at least one projection"));
    }
    let needed = required_groups(gamma, c, n_hat);
    let target = needed.min(ell);
    let mut groups = target | 1;
    let mut below_theory = needed > ell;
    if groups > ell {
        groups = if ell % 2 == 1 { ell } else { ell - 1 };
        below_theory = true;
    }
    Ok(PartitionSpec {
        group_size: ell / groups,
        groups,
        below_theory,
    })
}

/// Median-of-means estimate of every transform coefficient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientEstimate {
    pub theta: Vec<f64>,
    /// `groups[g][i]` is the estimate of coefficient `i` from group `g`.
    pub groups: Vec<Vec<f64>>,
}

impl CoefficientEstimate {
    pub fn group_estimates(&self, i: usize) -> Vec<f64> {
        self.groups.iter().map(|z| z[i]).collect()
    }
}

/// Median of an odd-length slice (upper median otherwise).
pub fn median(values: &mut [f64]) -> f64 {
    let mid = values.len() / 2;
    let (_, m, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    *m
}

pub fn estimate_coefficients(
    x: &[f64],
    plan: &SamplingPlan,
    basis: &TransformBasis,
    partition: &PartitionSpec,
) -> Result<CoefficientEstimate> {
    if x.len() != plan.ell {
        return Err(Error::DimensionMismatch {
            expected: plan.ell,
            actual: x.len(),
        });
    }
    if partition.group_size == 0 || partition.groups == 0 || partition.used_rows() > plan.ell {
        return Err(Error::PartitionMismatch(format!(
            "{} groups of {} rows need more than the plan's {} projections",
            partition.groups, partition.group_size, plan.ell
        )));
    }
    let n_hat = basis.dimension();
    let layout = plan_layout(plan, n_hat)?;
    let scale = (plan.ell as f64).sqrt() / partition.group_size as f64;

    let groups: Vec<Vec<f64>> = (0..partition.groups)
        .into_par_iter()
        .map(|g| {
            let mut w = vec![0.0; n_hat];
            for r in g * partition.group_size..(g + 1) * partition.group_size {
                let row = generate_row(plan.seed, r, layout, &plan.g);
                for &(q, v) in &row.entries {
                    w[q] += x[r] * v;
                }
            }
            let mut z = basis.forward(&w).expect("dimension checked");
            for v in &mut z {
                *v *= scale;
            }
            z
        })
        .collect();

    let theta = (0..n_hat)
        .map(|i| {
            let mut col: Vec<f64> = groups.iter().map(|z| z[i]).collect();
            median(&mut col)
        })
        .collect();
    Ok(CoefficientEstimate { theta, groups })
}

/// `u_hat = Psi best_k(theta_hat)`.
pub fn reconstruct(
    x: &[f64],
    plan: &SamplingPlan,
    basis: &TransformBasis,
    k: usize,
    partition: &PartitionSpec,
) -> Result<Vec<f64>> {
    if k == 0 || k > basis.dimension() {
        return Err(Error::invalid(format!(
            "k = {k} outside [1, {}]",
            basis.dimension()
        )));
    }
    let est = estimate_coefficients(x, plan, basis, partition)?;
    basis.inverse(&best_k_approx(&est.theta, k))
}

/// `max_j 1/g_j = sum(E) / (E_min kappa)` for an energy-weighted plan.
pub fn max_inverse_probability(profile: &EnergyProfile, kappa: f64) -> f64 {
    profile.total() / (profile.min() * kappa)
}

/// Projection count guaranteeing per-coefficient error `epsilon`:
/// `c1 (2 + c2 max_j 1/g_j) ln N̂ / epsilon^2`.
pub fn theoretical_projections(
    epsilon: f64,
    constants: &ModelConstants,
    n_hat: usize,
    max_inv_g: f64,
) -> f64 {
    constants.c1() * (2.0 + constants.c2() * max_inv_g) * (n_hat as f64).ln() / (epsilon * epsilon)
}

/// Inverse of [`theoretical_projections`]: the `epsilon` reached with `ell` projections.
pub fn error_for_projections(
    ell: f64,
    constants: &ModelConstants,
    n_hat: usize,
    max_inv_g: f64,
) -> f64 {
    (constants.c1() * (2.0 + constants.c2() * max_inv_g) * (n_hat as f64).ln() / ell).sqrt()
}
