use thiserror::Error;

/// Errors produced by the sampling, discrepancy and reconstruction routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates the documented preconditions.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// The input signal produced a non-finite value.
    #[error("signal evaluation failed at t = {t}: value {value}")]
    Evaluation { t: f64, value: f64 },
    /// The sampler could not resolve a threshold crossing.
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
