use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("{what} = {value} lies outside the domain [{min}, {max}]")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    /// Numerical accuracy budget exceeded; `suggested_step` is a step that
    /// should bring the integration back within tolerance.
    #[error("{what}: drift {drift:.3e} exceeds {limit:.1e}; retry with step {suggested_step:.3e}")]
    Accuracy {
        what: &'static str,
        drift: f64,
        limit: f64,
        suggested_step: f64,
    },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("field reached the computational boundary: {0}")]
    DomainOverflow(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of numerical accuracy rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Accuracy { .. }
                | Error::Solver(_)
                | Error::Calibration(_)
                | Error::DomainOverflow(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
