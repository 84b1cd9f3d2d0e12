//! Energy-aware sparse random projections for rechargeable sensor networks.
//!
//! Nodes sample a field only when a row of a seeded sparse projection matrix
//! asks for their reading, with per-node inclusion probabilities scaled to the
//! energy each node harvests. The base station regenerates the matrix from the
//! seed and recovers the field's largest transform coefficients with a
//! median-of-means sketch. The planner picks the projection count and sampling
//! scale that minimise the predicted error while keeping every node
//! energy-neutral.

pub mod analysis;
pub mod cli;
pub mod decoder;
pub mod error;
pub mod io;
pub mod model;
pub mod netsim;
pub mod planner;
pub mod projection;
pub mod rng;
pub mod signal;
pub mod synth;
pub mod transform;

pub use error::{Error, Result};
pub use model::{EnergyLedger, EnergyProfile, ModelConstants, SamplingPlan};
pub use signal::{relative_error, Layout, Signal};
pub use transform::{Basis, TransformBasis};
