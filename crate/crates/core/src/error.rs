use thiserror::Error;

/// Errors raised by the computational modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration parameter is invalid (e.g. a degenerate kernel exponent).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Array or matrix dimensions do not agree.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A stated precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An iterative routine produced a non-finite value.
    #[error("numerical failure at step {step}: {detail}")]
    Numerical { step: usize, detail: String },

    /// Not enough independent data to determine a fit.
    #[error("rank deficient: {0}")]
    Rank(String),

    /// A modelling assumption could not be verified from the supplied curve.
    #[error("assumption failure: {0}")]
    Assumption(String),
}

pub type Result<T> = std::result::Result<T, Error>;
