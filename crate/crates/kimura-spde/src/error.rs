use thiserror::Error;

/// Errors shared across the numerical layers.
///
/// Accuracy failures carry the partial value so a caller can decide whether
/// the result is still usable for a bound check.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain error in {context}: {message}")]
    Domain {
        context: &'static str,
        message: String,
    },

    #[error("accuracy target missed in {context}; partial value {partial:e}")]
    Accuracy { context: &'static str, partial: f64 },

    #[error("spatial truncation tail {tail:e} exceeds tolerance for value {value:e}")]
    Truncation { value: f64, tail: f64 },

    #[error("non-finite value in {context} at {location}")]
    NonFinite {
        context: &'static str,
        location: String,
    },

    #[error("covariance factorization failed: {0}")]
    Factorization(String),

    #[error("invalid configuration:\n{}", violations.join("\n"))]
    Config { violations: Vec<String> },

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub fn domain(context: &'static str, message: impl Into<String>) -> Self {
        Error::Domain {
            context,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
