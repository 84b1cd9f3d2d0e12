use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EnergyProfile, ModelConstants};
use crate::rng::derive_seed;
use crate::signal::Signal;
use crate::synth::{best_k_fraction, synth_signal, SynthSpec};
use crate::transform::{mu_bound, Basis};
use crate::{io, Error as E};

/// Experiment settings. Keys in the TOML file and command-line flags share names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Signal CSV; synthetic fields are generated when absent.
    pub signal: Option<PathBuf>,
    /// Energy CSV of per-instant harvest rates; uniform `rate` when absent.
    pub energy: Option<PathBuf>,
    pub output: PathBuf,
    /// Projection CSV read by `reconstruct`; defaults to `<output>/projections.csv`.
    pub projections: Option<PathBuf>,
    pub basis: Basis,
    pub k: usize,
    pub gamma: f64,
    /// Best-k error fraction; defaults to the generator's closed form.
    pub eta: Option<f64>,
    pub c: f64,
    /// Peak-to-total bound; defaults to the envelope for `s`.
    pub mu: Option<f64>,
    pub voltage: f64,
    pub current: f64,
    pub sample_time: f64,
    pub s: f64,
    pub r: f64,
    pub nodes: usize,
    pub n_hat: Vec<usize>,
    pub seeds: usize,
    pub seed: u64,
    /// Uniform per-instant harvest; defaults to half the per-sample energy.
    pub rate: Option<f64>,
    pub max_projections: usize,
    pub trials: usize,
    /// Beta shapes as `alpha:beta`.
    pub shapes: Vec<String>,
    pub budget_ratios: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            signal: None,
            energy: None,
            output: PathBuf::from("out"),
            projections: None,
            basis: Basis::Haar,
            k: 8,
            gamma: 0.5,
            eta: None,
            c: 0.5,
            mu: None,
            voltage: 1.0,
            current: 1.0,
            sample_time: 1.0,
            s: 0.8,
            r: 1.0,
            nodes: 8,
            n_hat: vec![64, 128, 256, 512, 1024, 2048],
            seeds: 20,
            seed: 0,
            rate: None,
            max_projections: 1_000_000,
            trials: 1000,
            shapes: vec!["2:20".into(), "20:2".into()],
            budget_ratios: vec![0.1, 0.5, 0.9],
        }
    }
}

/// Command-line overrides; each flag replaces the config key of the same name.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long, global = true)]
    pub signal: Option<PathBuf>,
    #[arg(long, global = true)]
    pub energy: Option<PathBuf>,
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub projections: Option<PathBuf>,
    #[arg(long, global = true)]
    pub basis: Option<Basis>,
    #[arg(long, global = true)]
    pub k: Option<usize>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    #[arg(long, global = true)]
    pub c: Option<f64>,
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    #[arg(long, global = true)]
    pub voltage: Option<f64>,
    #[arg(long, global = true)]
    pub current: Option<f64>,
    #[arg(long = "sample-time", global = true)]
    pub sample_time: Option<f64>,
    #[arg(long, global = true)]
    pub s: Option<f64>,
    #[arg(long, global = true)]
    pub r: Option<f64>,
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    #[arg(long = "n-hat", global = true, value_delimiter = ',')]
    pub n_hat: Vec<usize>,
    #[arg(long, global = true)]
    pub seeds: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub rate: Option<f64>,
    #[arg(long = "max-projections", global = true)]
    pub max_projections: Option<usize>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub shapes: Vec<String>,
    #[arg(long = "budget-ratios", global = true, value_delimiter = ',')]
    pub budget_ratios: Vec<f64>,
}

macro_rules! override_opt {
    ($cfg:ident, $ov:ident, $($f:ident),*) => {
        $( if let Some(v) = $ov.$f.clone() { $cfg.$f = v; } )*
    };
}

macro_rules! override_some {
    ($cfg:ident, $ov:ident, $($f:ident),*) => {
        $( if $ov.$f.is_some() { $cfg.$f = $ov.$f.clone(); } )*
    };
}

macro_rules! override_list {
    ($cfg:ident, $ov:ident, $($f:ident),*) => {
        $( if !$ov.$f.is_empty() { $cfg.$f = $ov.$f.clone(); } )*
    };
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let field = e
                .message()
                .split('`')
                .nth(1)
                .unwrap_or("config")
                .to_string();
            E::config(field, e.message().trim().to_string())
        })
    }

    pub fn apply(&mut self, ov: &Overrides) {
        override_some!(self, ov, signal, energy, projections, eta, mu, rate);
        override_opt!(
            self, ov, output, basis, k, gamma, c, voltage, current, sample_time, s, r, nodes, seeds,
            seed, max_projections, trials
        );
        override_list!(self, ov, n_hat, shapes, budget_ratios);
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be positive, got {v}")))
            }
        };
        positive("gamma", self.gamma)?;
        positive("voltage", self.voltage)?;
        positive("current", self.current)?;
        positive("sample-time", self.sample_time)?;
        positive("r", self.r)?;
        if !(self.c > 0.0 && self.c < 1.0) {
            return Err(Error::config("c", format!("must lie in (0, 1), got {}", self.c)));
        }
        if !(self.s > 0.0 && self.s <= 1.0) {
            return Err(Error::config("s", format!("must lie in (0, 1], got {}", self.s)));
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::config("eta", format!("must lie in (0, 1], got {eta}")));
            }
        }
        if let Some(mu) = self.mu {
            positive("mu", mu)?;
        }
        if let Some(rate) = self.rate {
            positive("rate", rate)?;
        }
        for (field, v) in [
            ("k", self.k),
            ("nodes", self.nodes),
            ("seeds", self.seeds),
            ("max-projections", self.max_projections),
            ("trials", self.trials),
        ] {
            if v == 0 {
                return Err(Error::config(field, "must be at least 1"));
            }
        }
        if self.n_hat.is_empty() {
            return Err(Error::config("n-hat", "needs at least one signal length"));
        }
        for &n in &self.n_hat {
            if self.basis == Basis::Haar && !n.is_power_of_two() {
                return Err(Error::config("n-hat", format!("{n} is not a power of two (required by haar)")));
            }
            if n % self.nodes != 0 {
                return Err(Error::config(
                    "n-hat",
                    format!("{n} is not a multiple of nodes = {}", self.nodes),
                ));
            }
            if self.k > n {
                return Err(Error::config("k", format!("{} exceeds signal length {n}", self.k)));
            }
        }
        self.shape_pairs()?;
        for &b in &self.budget_ratios {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::config("budget-ratios", format!("{b} outside (0, 1)")));
            }
        }
        Ok(())
    }

    pub fn shape_pairs(&self) -> Result<Vec<(f64, f64)>> {
        self.shapes
            .iter()
            .map(|s| {
                let parse = || -> Option<(f64, f64)> {
                    let (a, b) = s.split_once(':')?;
                    let (a, b) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
                    (a > 0.0 && b > 0.0).then_some((a, b))
                };
                parse().ok_or_else(|| Error::config("shapes", format!("'{s}' is not alpha:beta with positive shapes")))
            })
            .collect()
    }

    pub fn c4(&self) -> f64 {
        self.voltage * self.current * self.sample_time
    }

    pub fn constants(&self, n_hat: usize) -> Result<ModelConstants> {
        let eta = self.eta.unwrap_or_else(|| best_k_fraction(n_hat, self.s, self.k));
        let mu = self.mu.unwrap_or_else(|| mu_bound(n_hat, self.s));
        ModelConstants::new(
            self.k,
            self.gamma,
            eta,
            self.c,
            mu,
            self.voltage,
            self.current,
            self.sample_time,
        )
    }

    /// Per-instant harvest rate of every node.
    pub fn rates(&self) -> Result<Vec<f64>> {
        match &self.energy {
            Some(path) => {
                let rates = io::ingest_energy(path)?;
                if rates.len() != self.nodes {
                    return Err(Error::config(
                        "energy",
                        format!("lists {} nodes but nodes = {}", rates.len(), self.nodes),
                    ));
                }
                Ok(rates)
            }
            None => Ok(vec![self.rate.unwrap_or(self.c4() / 2.0); self.nodes]),
        }
    }

    /// Horizon profile for a signal of length `n_hat`.
    pub fn profile(&self, n_hat: usize) -> Result<EnergyProfile> {
        EnergyProfile::from_rates(&self.rates()?, n_hat / self.nodes)
    }

    /// Seed of trial `trial` at length `n_hat`.
    pub fn trial_seed(&self, n_hat: usize, trial: usize) -> u64 {
        derive_seed(derive_seed(self.seed, n_hat as u64), trial as u64)
    }

    /// Up to `count` signals of length `n_hat`: segments of the signal file, or synthetic fields.
    pub fn signals(&self, n_hat: usize, count: usize) -> Result<Vec<Signal>> {
        let instants = n_hat / self.nodes;
        match &self.signal {
            Some(path) => {
                let full = io::ingest_signal(path)?;
                if full.nodes() != self.nodes {
                    return Err(Error::config(
                        "signal",
                        format!("has {} nodes but nodes = {}", full.nodes(), self.nodes),
                    ));
                }
                let mut segs = io::segment(&full, instants)?;
                if segs.is_empty() {
                    return Err(Error::config(
                        "signal",
                        format!("fewer than {instants} instants; cannot form a segment of length {n_hat}"),
                    ));
                }
                segs.truncate(count);
                Ok(segs)
            }
            None => (0..count)
                .map(|t| {
                    let spec = SynthSpec {
                        n_hat,
                        nodes: self.nodes,
                        s: self.s,
                        r: self.r,
                        basis: self.basis,
                        seed: derive_seed(self.trial_seed(n_hat, t), 0),
                    };
                    Ok(synth_signal(&spec)?.signal)
                })
                .collect(),
        }
    }

    /// Seed of the projection matrix used for trial `trial`.
    pub fn matrix_seed(&self, n_hat: usize, trial: usize) -> u64 {
        derive_seed(self.trial_seed(n_hat, trial), 1)
    }

    pub fn projections_path(&self) -> PathBuf {
        self.projections
            .clone()
            .unwrap_or_else(|| self.output.join("projections.csv"))
    }
}
