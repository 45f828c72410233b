//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Zero subchannels or zero power: the Fisher information vanishes.
    #[error("position error bound is unbounded (n_sub = {n_sub}, power = {power})")]
    UnboundedPeb { n_sub: u32, power: f64 },

    #[error("singular sensing geometry: cos(theta) = 0")]
    SingularGeometry,

    /// Best-case utility does not exceed the floor, so the risk ratio has no meaning.
    #[error("risk ratio undefined: u_max = {u_max} <= u_min = {u_min}")]
    RiskUndefined { u_max: f64, u_min: f64 },

    #[error("exact enumeration over {n} participation variables exceeds the limit of {limit}")]
    EnumerationTooLarge { n: usize, limit: usize },

    #[error("exhaustive search budget of {budget} evaluations exceeded")]
    BudgetExceeded { budget: u64 },

    #[error("{path}: line {line}: {msg}")]
    Parse { path: String, line: u64, msg: String },

    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
