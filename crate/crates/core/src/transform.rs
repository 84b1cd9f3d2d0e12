//! Orthonormal transforms and the signal-model checks built on them.
//!
//! Haar coefficients use the in-place pyramid ordering: index 0 holds the
//! scaling coefficient, `[1, 2)` the coarsest detail, `[2, 4)` the next level
//! and so on up to `[N/2, N)` for the finest detail.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::norm2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Haar,
    Dct,
}

impl std::str::FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "haar" => Ok(Basis::Haar),
            "dct" => Ok(Basis::Dct),
            other => Err(Error::invalid(format!("unknown basis '{other}' (expected haar or dct)"))),
        }
    }
}

impl std::fmt::Display for Basis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Basis::Haar => "haar",
            Basis::Dct => "dct",
        })
    }
}

/// An orthonormal basis `Psi` of dimension `N̂`; `forward` applies `Psi^T`.
#[derive(Debug, Clone)]
pub struct TransformBasis {
    kind: Basis,
    dimension: usize,
    // cos(pi m / 2N) for m in 0..4N
    cos_table: Vec<f64>,
}

impl TransformBasis {
    pub fn new(kind: Basis, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("transform dimension must be positive"));
        }
        if kind == Basis::Haar && !dimension.is_power_of_two() {
            return Err(Error::invalid(format!(
                "haar transform needs a power-of-two length, got {dimension}"
            )));
        }
        let cos_table = match kind {
            Basis::Haar => Vec::new(),
            Basis::Dct => {
                let period = 4 * dimension;
                (0..period)
                    .map(|m| (PI * m as f64 / (2 * dimension) as f64).cos())
                    .collect()
            }
        };
        Ok(Self {
            kind,
            dimension,
            cos_table,
        })
    }

    pub fn kind(&self) -> Basis {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: v.len(),
            });
        }
        Ok(())
    }

    /// `theta = Psi^T u`.
    pub fn forward(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u)?;
        Ok(match self.kind {
            Basis::Haar => haar_forward(u),
            Basis::Dct => self.dct_forward(u),
        })
    }

    /// `u = Psi theta`.
    pub fn inverse(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_len(theta)?;
        Ok(match self.kind {
            Basis::Haar => haar_inverse(theta),
            Basis::Dct => self.dct_inverse(theta),
        })
    }

    /// Basis vector `psi_i`.
    pub fn column(&self, i: usize) -> Result<Vec<f64>> {
        if i >= self.dimension {
            return Err(Error::invalid(format!("basis index {i} out of range")));
        }
        let mut e = vec![0.0; self.dimension];
        e[i] = 1.0;
        self.inverse(&e)
    }

    /// Dense `Psi`, row-major: `matrix[q][i] = psi_i[q]`.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let n = self.dimension;
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            let col = self.column(i).expect("index in range");
            for (q, v) in col.into_iter().enumerate() {
                m[q][i] = v;
            }
        }
        m
    }

    fn dct_scale(&self, k: usize) -> f64 {
        let n = self.dimension as f64;
        if k == 0 {
            (1.0 / n).sqrt()
        } else {
            (2.0 / n).sqrt()
        }
    }

    #[inline]
    fn dct_cos(&self, n: usize, k: usize) -> f64 {
        self.cos_table[((2 * n + 1) * k) % self.cos_table.len()]
    }

    fn dct_forward(&self, u: &[f64]) -> Vec<f64> {
        (0..self.dimension)
            .map(|k| {
                let s: f64 = u.iter().enumerate().map(|(n, &v)| v * self.dct_cos(n, k)).sum();
                self.dct_scale(k) * s
            })
            .collect()
    }

    fn dct_inverse(&self, theta: &[f64]) -> Vec<f64> {
        (0..self.dimension)
            .map(|n| {
                theta
                    .iter()
                    .enumerate()
                    .map(|(k, &t)| self.dct_scale(k) * t * self.dct_cos(n, k))
                    .sum()
            })
            .collect()
    }
}

fn haar_forward(u: &[f64]) -> Vec<f64> {
    let mut out = u.to_vec();
    let mut scratch = vec![0.0; u.len()];
    let mut len = u.len();
    while len > 1 {
        let half = len / 2;
        for i in 0..half {
            let (a, b) = (out[2 * i], out[2 * i + 1]);
            scratch[i] = (a + b) * FRAC_1_SQRT_2;
            scratch[half + i] = (a - b) * FRAC_1_SQRT_2;
        }
        out[..len].copy_from_slice(&scratch[..len]);
        len = half;
    }
    out
}

fn haar_inverse(theta: &[f64]) -> Vec<f64> {
    let mut out = theta.to_vec();
    let mut scratch = vec![0.0; theta.len()];
    let mut len = 1;
    while len < theta.len() {
        for i in 0..len {
            let (a, d) = (out[i], out[len + i]);
            scratch[2 * i] = (a + d) * FRAC_1_SQRT_2;
            scratch[2 * i + 1] = (a - d) * FRAC_1_SQRT_2;
        }
        len *= 2;
        out[..len].copy_from_slice(&scratch[..len]);
    }
    out
}

/// Indices ordered by decreasing magnitude, lowest index first among ties.
pub fn magnitude_order(theta: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..theta.len()).collect();
    idx.sort_by(|&a, &b| theta[b].abs().total_cmp(&theta[a].abs()).then(a.cmp(&b)));
    idx
}

/// Keeps the `k` largest-magnitude coefficients and zeroes the rest.
///
/// `k` beyond the length keeps everything; zero coefficients are never counted
/// as retained.
pub fn best_k_approx(theta: &[f64], k: usize) -> Vec<f64> {
    let mut out = vec![0.0; theta.len()];
    for &i in magnitude_order(theta).iter().take(k) {
        out[i] = theta[i];
    }
    out
}

/// Power-law fit `|theta|_(pi) <= R pi^(-1/s)` of the sorted coefficient magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompressibilityFit {
    pub r: f64,
    pub s: f64,
    /// Root-mean-square residual of the log-log regression.
    pub residual: f64,
    /// Fitted decay is a proper power law with `s` in (0, 1].
    pub valid: bool,
}

pub fn compressibility_fit(theta: &[f64]) -> Result<CompressibilityFit> {
    let mut mags: Vec<f64> = theta.iter().map(|t| t.abs()).filter(|&t| t > 0.0).collect();
    if mags.is_empty() {
        return Err(Error::DegenerateSignal);
    }
    if mags.len() < 2 {
        return Err(Error::invalid("power-law fit needs at least two nonzero coefficients"));
    }
    mags.sort_by(|a, b| b.total_cmp(a));
    let pts: Vec<(f64, f64)> = mags
        .iter()
        .enumerate()
        .map(|(p, &m)| (((p + 1) as f64).ln(), m.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    if slope >= 0.0 {
        return Ok(CompressibilityFit {
            r: mags[0],
            s: f64::INFINITY,
            residual,
            valid: false,
        });
    }
    let s = -1.0 / slope;
    let r = mags
        .iter()
        .enumerate()
        .map(|(p, &m)| m * ((p + 1) as f64).powf(1.0 / s))
        .fold(0.0, f64::max);
    Ok(CompressibilityFit {
        r,
        s,
        residual,
        valid: s <= 1.0 + 1e-9,
    })
}

/// Envelope for `||u||_inf / ||u||_2`: `ln N̂ / sqrt(N̂)` when `s = 1`, else `1 / sqrt(N̂)`.
pub fn mu_bound(n_hat: usize, s: f64) -> f64 {
    let n = n_hat as f64;
    if s == 1.0 {
        n.ln() / n.sqrt()
    } else {
        1.0 / n.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakToTotal {
    pub ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

/// `||u||_inf / ||u||_2` against [`mu_bound`] with constant factor 1.
pub fn peak_to_total_check(u: &[f64], s: f64) -> Result<PeakToTotal> {
    let ratio = peak_to_total_ratio(u)?;
    let bound = mu_bound(u.len(), s);
    Ok(PeakToTotal {
        ratio,
        bound,
        pass: ratio <= bound,
    })
}

pub fn peak_to_total_ratio(u: &[f64]) -> Result<f64> {
    let total = norm2(u);
    if total == 0.0 {
        return Err(Error::DegenerateSignal);
    }
    let peak = u.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(peak / total)
}
