use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model, signal or config failed validation.
    #[error("validation error: {0}")]
    Validation(String),

    /// Quadrature or an iterative method did not reach the requested tolerance.
    #[error("numerical non-convergence: {message} (achieved {achieved:e})")]
    NonConvergence { message: String, achieved: f64 },

    /// A standing hypothesis required by the operation does not hold.
    #[error("hypothesis failure: {0}")]
    Hypothesis(String),

    /// No admissible constant exists for the requested bound.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
