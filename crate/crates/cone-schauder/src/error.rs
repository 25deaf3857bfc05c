use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A point or ball falls outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// The requested estimate lies outside the range 0 < alpha < mu.
    #[error("alpha = {alpha} is outside the estimate's scope 0 < alpha < mu = {mu}")]
    Scope { alpha: f64, mu: f64 },
    /// A linear solve, projection or quadrature did not meet its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// The input is valid but not in the class the method handles.
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
