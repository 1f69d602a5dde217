use thiserror::Error;

/// Errors produced by the quench library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The input is mathematically outside the domain of the operation
    /// (singular state, critical point of a bound, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    /// Two independent evaluations of the same quantity disagreed.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("gapless mode at k = {k} (epsilon_k = {eps:e})")]
    GaplessMode { k: f64, eps: f64 },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True when the error stems from bad user input rather than a numerical
    /// breakdown.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Validation(_) | Error::DimensionMismatch { .. } | Error::Unsupported(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
