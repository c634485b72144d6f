//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by samplers, generator construction, and solvers.
#[derive(Debug, Error)]
pub enum FriskError {
    /// A parameter is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration is structurally invalid (empty region, mismatched dimensions, ...).
    #[error("config error: {0}")]
    Config(String),

    /// A subordinator path does not reach the requested clock time.
    /// The caller should rebuild the path with a larger `u_max`.
    #[error("path horizon exhausted: D_u reaches only {d_max} but t = {t}; extend u_max")]
    HorizonExhausted { t: f64, d_max: f64 },

    /// An implicit step could not be solved to tolerance.
    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    /// A solver output violated a structural invariant (bounds or monotonicity).
    /// This indicates a discretization bug, never a tolerance issue.
    #[error("solution invariant violated: {0}")]
    InvariantViolation(String),

    /// File or serialization failure while reading or writing datasets.
    #[error("dataset i/o error: {0}")]
    DatasetIo(String),
}

impl From<std::io::Error> for FriskError {
    fn from(e: std::io::Error) -> Self {
        FriskError::DatasetIo(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, FriskError>;
