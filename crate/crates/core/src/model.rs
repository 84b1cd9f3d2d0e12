//! Shared domain types: energy profiles, sampling plans, model constants and
//! the per-node energy ledger produced by a simulation run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projection::sampling_probabilities;

/// Harvested energy `E_j` of every node over one planning horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyProfile {
    energies: Vec<f64>,
}

impl EnergyProfile {
    /// Nodes with zero (or negative, or non-finite) energy are rejected.
    pub fn new(energies: Vec<f64>) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::invalid("energy profile needs at least one node"));
        }
        if let Some(j) = energies.iter().position(|e| !e.is_finite() || *e <= 0.0) {
            return Err(Error::invalid(format!(
                "node {j} has non-positive energy {}; remove dead nodes before planning",
                energies[j]
            )));
        }
        Ok(Self { energies })
    }

    /// Profile over a horizon of `instants` sampling intervals, given per-interval harvest rates.
    pub fn from_rates(rates: &[f64], instants: usize) -> Result<Self> {
        Self::new(rates.iter().map(|r| r * instants as f64).collect())
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, node: usize) -> f64 {
        self.energies[node]
    }

    pub fn total(&self) -> f64 {
        self.energies.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.energies.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Index of the minimum-energy node (lowest index on ties).
    pub fn argmin(&self) -> usize {
        let min = self.min();
        self.energies.iter().position(|&e| e == min).unwrap_or(0)
    }

    /// Node indices in non-decreasing energy order.
    pub fn sorted_indices(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.energies[a].total_cmp(&self.energies[b]).then(a.cmp(&b)));
        idx
    }

    /// Every energy multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.energies.iter().map(|e| e * factor).collect())
    }
}

/// Number of projections, per-node inclusion probabilities and the seed both
/// the nodes and the base station use to regenerate the projection matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub ell: usize,
    pub kappa: f64,
    pub g: Vec<f64>,
    pub seed: u64,
}

impl SamplingPlan {
    /// `g_j = kappa * E_j / sum(E)`.
    pub fn energy_weighted(profile: &EnergyProfile, ell: usize, kappa: f64, seed: u64) -> Result<Self> {
        let g = sampling_probabilities(profile, kappa)?;
        Ok(Self { ell, kappa, g, seed })
    }

    /// Plan with arbitrary per-node probabilities; `kappa` is recorded as `sum(g)`.
    ///
    /// `ell = 0` is accepted and describes a horizon with no sampling at all.
    pub fn from_probabilities(ell: usize, g: Vec<f64>, seed: u64) -> Result<Self> {
        if g.is_empty() {
            return Err(Error::invalid("plan needs at least one node"));
        }
        if let Some(j) = g.iter().position(|p| !(*p > 0.0 && *p <= 1.0)) {
            return Err(Error::invalid(format!(
                "inclusion probability g[{j}] = {} outside (0, 1]",
                g[j]
            )));
        }
        let kappa = g.iter().sum();
        Ok(Self { ell, kappa, g, seed })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn nodes(&self) -> usize {
        self.g.len()
    }

    /// `max_j 1/g_j`.
    pub fn max_inverse_probability(&self) -> f64 {
        self.g.iter().map(|g| 1.0 / g).fold(0.0, f64::max)
    }
}

/// Constants of the error model and of the sampling hardware.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    /// Number of retained transform coefficients.
    pub k: usize,
    /// Failure probability exponent: guarantees hold with probability `1 - N^-gamma`.
    pub gamma: f64,
    /// Best-k-term error fraction.
    pub eta: f64,
    /// Chernoff constant in (0, 1).
    pub c: f64,
    /// Peak-to-total bound `||u||_inf / ||u||_2 <= mu`.
    pub mu: f64,
    pub voltage: f64,
    pub current: f64,
    pub sample_time: f64,
    c1: f64,
}

impl ModelConstants {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        k: usize,
        gamma: f64,
        eta: f64,
        c: f64,
        mu: f64,
        voltage: f64,
        current: f64,
        sample_time: f64,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::invalid("gamma must be positive"));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::invalid("eta must lie in (0, 1]"));
        }
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::invalid("c must lie in (0, 1)"));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::invalid("mu must be positive"));
        }
        for (name, v) in [("voltage", voltage), ("current", current), ("sample_time", sample_time)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive")));
            }
        }
        let c1 = Self::c1_from(k, gamma, c, eta);
        Ok(Self {
            k,
            gamma,
            eta,
            c,
            mu,
            voltage,
            current,
            sample_time,
            c1,
        })
    }

    /// Same model with a per-sample energy of exactly `c4` (voltage and current set to 1).
    pub fn with_sample_energy(k: usize, gamma: f64, eta: f64, c: f64, mu: f64, c4: f64) -> Result<Self> {
        Self::new(k, gamma, eta, c, mu, 1.0, 1.0, c4)
    }

    fn c1_from(k: usize, gamma: f64, c: f64, eta: f64) -> f64 {
        let k = k as f64;
        48.0 * (1.0 + gamma) * k * k / (c * c * eta * eta)
    }

    /// `48 (1 + gamma) k^2 / (c^2 eta^2)`.
    pub fn c1(&self) -> f64 {
        self.c1
    }

    /// `mu^2`.
    pub fn c2(&self) -> f64 {
        self.mu * self.mu
    }

    /// Energy to acquire one sample, `V * I * T`.
    pub fn c4(&self) -> f64 {
        self.voltage * self.current * self.sample_time
    }

    /// True when the stored `c1` matches a fresh computation from `(k, gamma, c, eta)`.
    pub fn is_consistent(&self) -> bool {
        self.c1 == Self::c1_from(self.k, self.gamma, self.c, self.eta)
    }
}

/// Harvested versus consumed sampling energy per node after a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyLedger {
    pub harvested: Vec<f64>,
    pub samples: Vec<usize>,
    pub sample_energy: f64,
    pub messages_to_base: usize,
}

impl EnergyLedger {
    pub fn new(harvested: Vec<f64>, sample_energy: f64) -> Self {
        let n = harvested.len();
        Self {
            harvested,
            samples: vec![0; n],
            sample_energy,
            messages_to_base: 0,
        }
    }

    pub fn consumed(&self, node: usize) -> f64 {
        self.samples[node] as f64 * self.sample_energy
    }

    pub fn consumed_all(&self) -> Vec<f64> {
        (0..self.samples.len()).map(|j| self.consumed(j)).collect()
    }

    pub fn is_energy_neutral(&self) -> bool {
        (0..self.samples.len()).all(|j| self.consumed(j) <= self.harvested[j])
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["node", "harvested", "consumed", "samples"])?;
        for j in 0..self.samples.len() {
            w.write_record([
                j.to_string(),
                self.harvested[j].to_string(),
                self.consumed(j).to_string(),
                self.samples[j].to_string(),
            ])?;
        }
        finish_csv(w)
    }
}

pub(crate) fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Csv(e.to_string()))
}
