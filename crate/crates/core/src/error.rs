use thiserror::Error;

/// Errors surfaced by the numeric layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A constructed object violates a required shape property.
    #[error("shape violation: {0}")]
    Shape(String),

    /// Evaluation requested outside the function's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature or solver missed its tolerance; carries the achieved
    /// error estimate so callers can decide whether to accept anyway.
    #[error("numeric tolerance missed: requested {requested:.3e}, achieved {achieved:.3e} ({context})")]
    Numeric {
        requested: f64,
        achieved: f64,
        context: String,
    },

    /// Insufficient working precision (e.g. truncation tails too heavy).
    #[error("precision failure: {0}")]
    Precision(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn numeric(requested: f64, achieved: f64, context: impl Into<String>) -> Self {
        Error::Numeric {
            requested,
            achieved,
            context: context.into(),
        }
    }
}
