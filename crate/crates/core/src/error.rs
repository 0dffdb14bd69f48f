use thiserror::Error;

/// Errors raised by the capacity toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input is outside the domain of the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure failed to converge or hit a conditioning limit.
    #[error("numerical failure: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>, residual: f64) -> Self {
        Error::Numerical {
            message: msg.into(),
            residual,
        }
    }

    /// True for numerical (as opposed to input-domain) failures.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical { .. })
    }
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite, got {value}")))
    }
}

pub(crate) fn ensure_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} must be positive, got {value}"
        )))
    }
}
