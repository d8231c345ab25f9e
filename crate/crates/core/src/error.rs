use thiserror::Error;

/// Errors raised by the numerical routines and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("covariance not positive definite: pivot {index} has value {value:e}")]
    NotPositiveDefinite { index: usize, value: f64 },

    #[error("circulant embedding has a negative eigenvalue ({min:e}) at embedding size {size}")]
    NegativeEigenvalue { min: f64, size: usize },

    #[error("singular kernel matrix: diagonal entry {row} is {value:e}")]
    SingularKernel { row: usize, value: f64 },

    #[error("non-finite value in path {path} at step {step}")]
    NonFinite { path: usize, step: usize },

    #[error("missing derivative: {0}")]
    MissingDerivative(&'static str),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("regime violated: {0}")]
    Regime(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
