//! Sparse three-point random projections, regenerated row by row from a seed.
//!
//! Entry `(r, q)` is `+sqrt(1/g)` with probability `g/2`, `-sqrt(1/g)` with
//! probability `g/2` and zero otherwise, where `g` is the inclusion probability
//! of the node owning column `q`. The uniform variate `w` for the entry comes
//! from [`crate::rng`] and is mapped as `w < g/2` to plus, `w >= 1 - g/2` to
//! minus.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{EnergyProfile, SamplingPlan};
use crate::rng::RowStream;
use crate::signal::Layout;

/// `g_j = kappa * E_j / sum(E)`.
pub fn sampling_probabilities(profile: &EnergyProfile, kappa: f64) -> Result<Vec<f64>> {
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::invalid(format!("kappa = {kappa} outside (0, 1]")));
    }
    let total = profile.total();
    let g: Vec<f64> = profile.energies().iter().map(|e| kappa * e / total).collect();
    assert!(g.iter().all(|&p| p > 0.0 && p <= 1.0));
    Ok(g)
}

/// Nonzero entries of one projection row in ascending column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionRow {
    pub row: usize,
    pub entries: Vec<(usize, f64)>,
}

impl ProjectionRow {
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }
}

/// Row `row` (0-based) of the projection matrix for `layout`, with node probabilities `g`.
pub fn generate_row(seed: u64, row: usize, layout: Layout, g: &[f64]) -> ProjectionRow {
    debug_assert_eq!(g.len(), layout.nodes);
    let mut stream = RowStream::new(seed, row as u64);
    let mut entries = Vec::new();
    for (j, &gj) in g.iter().enumerate() {
        let amp = (1.0 / gj).sqrt();
        let (lo, hi) = (gj / 2.0, 1.0 - gj / 2.0);
        for h in 0..layout.instants {
            let w = stream.next_uniform();
            if w < lo {
                entries.push((layout.column(h, j), amp));
            } else if w >= hi {
                entries.push((layout.column(h, j), -amp));
            }
        }
    }
    ProjectionRow { row, entries }
}

/// `sum_q Phi_rq u_q`, accumulated in ascending `q`.
#[inline]
pub fn row_dot(row: &ProjectionRow, u: &[f64]) -> f64 {
    let mut acc = 0.0;
    for &(q, v) in &row.entries {
        acc += v * u[q];
    }
    acc
}

/// `1/sqrt(ell)` normalisation applied to every row sum.
#[inline]
pub fn scale_row_sum(sum: f64, ell: usize) -> f64 {
    sum / (ell as f64).sqrt()
}

/// Column layout of a length-`n_hat` vector under `plan`.
pub fn plan_layout(plan: &SamplingPlan, n_hat: usize) -> Result<Layout> {
    let n = plan.nodes();
    if n_hat == 0 || !n_hat.is_multiple_of(n) {
        return Err(Error::invalid(format!(
            "signal length {n_hat} is not a positive multiple of the node count {n}"
        )));
    }
    Ok(Layout::new(n_hat / n, n))
}

/// All `ell` rows of the plan's matrix for a length-`n_hat` signal.
pub fn generate_rows(plan: &SamplingPlan, n_hat: usize) -> Result<Vec<ProjectionRow>> {
    let layout = plan_layout(plan, n_hat)?;
    Ok((0..plan.ell)
        .into_par_iter()
        .map(|r| generate_row(plan.seed, r, layout, &plan.g))
        .collect())
}

/// `x = (1/sqrt(ell)) Phi u`; empty when `ell = 0`.
pub fn project(u: &[f64], plan: &SamplingPlan) -> Result<Vec<f64>> {
    let layout = plan_layout(plan, u.len())?;
    Ok((0..plan.ell)
        .into_par_iter()
        .map(|r| {
            let row = generate_row(plan.seed, r, layout, &plan.g);
            scale_row_sum(row_dot(&row, u), plan.ell)
        })
        .collect())
}

/// Probability that a node with inclusion probability `g` samples a given
/// instant at least once across `ell` rows: `1 - (1 - g)^ell`.
pub fn sample_probability(g: f64, ell: usize) -> f64 {
    if ell == 0 {
        return 0.0;
    }
    if g >= 1.0 {
        return 1.0;
    }
    -((ell as f64) * (-g).ln_1p()).exp_m1()
}

/// Expected number of sampling sensors per instant for a uniform matrix: `N (1 - (1 - 1/rho)^ell)`.
pub fn mean_active_sensors_uniform(rho: f64, ell: usize, nodes: usize) -> f64 {
    nodes as f64 * sample_probability(1.0 / rho, ell)
}

/// Uniform sparse projection with entries `+-sqrt(rho)` or zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformMatrixSpec {
    pub rho: f64,
    pub ell: usize,
    pub n_hat: usize,
    pub seed: u64,
}

impl UniformMatrixSpec {
    pub fn new(rho: f64, ell: usize, n_hat: usize, seed: u64) -> Result<Self> {
        if !(rho >= 1.0 && rho.is_finite()) {
            return Err(Error::invalid(format!("sparsity rho = {rho} must be at least 1")));
        }
        if n_hat == 0 {
            return Err(Error::invalid("signal length must be positive"));
        }
        Ok(Self { rho, ell, n_hat, seed })
    }

    pub fn row(&self, row: usize) -> ProjectionRow {
        generate_row(self.seed, row, Layout::new(self.n_hat, 1), &[1.0 / self.rho])
    }

    pub fn project(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.n_hat {
            return Err(Error::DimensionMismatch {
                expected: self.n_hat,
                actual: u.len(),
            });
        }
        Ok((0..self.ell)
            .map(|r| scale_row_sum(row_dot(&self.row(r), u), self.ell))
            .collect())
    }
}
