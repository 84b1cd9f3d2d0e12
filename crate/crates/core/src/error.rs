use thiserror::Error;

/// Errors raised across the planning, projection and decoding pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("degenerate reference signal")]
    DegenerateSignal,

    #[error("profile too skewed: minimum-energy node cannot support one expected nonzero per row (kappa_min = {kappa_min})")]
    ProfileTooSkewed { kappa_min: f64 },

    #[error("node {node} harvests at least the per-sample energy; its constraint is trivially feasible")]
    TriviallyFeasible { node: usize },

    #[error("infeasible plan: node {node} overdraws its budget by {overdraw}")]
    InfeasiblePlan { node: usize, overdraw: f64 },

    #[error("partition does not fit plan: {0}")]
    PartitionMismatch(String),

    #[error("peak-to-total condition failed after {attempts} attempts (last ratio {ratio})")]
    PeakToTotal { attempts: usize, ratio: f64 },

    #[error("missing measurement at ({row}, {col})")]
    MissingMeasurement { row: usize, col: usize },

    #[error("malformed csv: {0}")]
    Csv(String),

    #[error("config: {field}: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error stems from bad user input rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Json(_) | Error::PeakToTotal { .. })
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Csv(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
