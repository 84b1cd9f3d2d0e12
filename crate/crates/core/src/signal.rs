//! The measurement field and its vectorized form.
//!
//! A [`Signal`] holds `M` time instants for each of `N` nodes. Vectorization
//! stacks node columns one after another, so (1-based) entry `q = h + (j-1)M`
//! carries the reading of node `j` at time `h`. Internally everything is
//! 0-based: `q = h + j * M`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    instants: usize,
    nodes: usize,
    // column-major, identical to the vectorized layout
    values: Vec<f64>,
}

impl Signal {
    /// Builds a signal from row-major readings: `rows[h][j]` is node `j` at time `h`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let instants = rows.len();
        if instants == 0 {
            return Err(Error::invalid("signal needs at least one time instant"));
        }
        let nodes = rows[0].len();
        if nodes == 0 {
            return Err(Error::invalid("signal needs at least one node"));
        }
        let mut values = vec![0.0; instants * nodes];
        for (h, row) in rows.iter().enumerate() {
            if row.len() != nodes {
                return Err(Error::DimensionMismatch {
                    expected: nodes,
                    actual: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                values[h + j * instants] = v;
            }
        }
        Self::checked(instants, nodes, values)
    }

    /// Inverse of [`Signal::vectorize`].
    pub fn from_vectorized(instants: usize, nodes: usize, values: Vec<f64>) -> Result<Self> {
        if instants == 0 || nodes == 0 {
            return Err(Error::invalid("signal dimensions must be positive"));
        }
        if values.len() != instants * nodes {
            return Err(Error::DimensionMismatch {
                expected: instants * nodes,
                actual: values.len(),
            });
        }
        Self::checked(instants, nodes, values)
    }

    fn checked(instants: usize, nodes: usize, values: Vec<f64>) -> Result<Self> {
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite reading at ({}, {})",
                pos % instants,
                pos / instants
            )));
        }
        Ok(Self {
            instants,
            nodes,
            values,
        })
    }

    /// Number of time instants `M`.
    pub fn instants(&self) -> usize {
        self.instants
    }

    /// Number of nodes `N`.
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Vectorized length `M * N`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Reading of node `node` at time `instant` (both 0-based).
    pub fn get(&self, instant: usize, node: usize) -> f64 {
        self.values[instant + node * self.instants]
    }

    pub fn vectorize(&self) -> Vec<f64> {
        self.values.clone()
    }

    pub fn as_vector(&self) -> &[f64] {
        &self.values
    }

    /// Row-major copy, one inner vector per time instant.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.instants)
            .map(|h| (0..self.nodes).map(|j| self.get(h, j)).collect())
            .collect()
    }

    /// Splits the time axis into consecutive segments of `instants` rows.
    /// A trailing partial segment is dropped; its length is returned alongside.
    pub fn segments(&self, instants: usize) -> Result<(Vec<Signal>, usize)> {
        if instants == 0 {
            return Err(Error::invalid("segment length must be positive"));
        }
        let full = self.instants / instants;
        let mut out = Vec::with_capacity(full);
        for s in 0..full {
            let mut values = Vec::with_capacity(instants * self.nodes);
            for j in 0..self.nodes {
                let start = j * self.instants + s * instants;
                values.extend_from_slice(&self.values[start..start + instants]);
            }
            out.push(Signal {
                instants,
                nodes: self.nodes,
                values,
            });
        }
        Ok((out, self.instants - full * instants))
    }
}

/// Column layout of a vectorized field: which node and time instant a column belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub instants: usize,
    pub nodes: usize,
}

impl Layout {
    pub fn new(instants: usize, nodes: usize) -> Self {
        Self { instants, nodes }
    }

    pub fn of(signal: &Signal) -> Self {
        Self::new(signal.instants(), signal.nodes())
    }

    pub fn len(&self) -> usize {
        self.instants * self.nodes
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node owning column `q`, i.e. `ceil(q / M)` in 1-based terms.
    #[inline]
    pub fn node_of(&self, q: usize) -> usize {
        q / self.instants
    }

    #[inline]
    pub fn instant_of(&self, q: usize) -> usize {
        q % self.instants
    }

    #[inline]
    pub fn column(&self, instant: usize, node: usize) -> usize {
        instant + node * self.instants
    }
}

/// `||u - u_hat||^2 / ||u||^2`.
pub fn relative_error(reference: &[f64], estimate: &[f64]) -> Result<f64> {
    if reference.len() != estimate.len() {
        return Err(Error::DimensionMismatch {
            expected: reference.len(),
            actual: estimate.len(),
        });
    }
    let norm: f64 = reference.iter().map(|v| v * v).sum();
    if norm == 0.0 {
        return Err(Error::DegenerateSignal);
    }
    let diff: f64 = reference
        .iter()
        .zip(estimate)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(diff / norm)
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
