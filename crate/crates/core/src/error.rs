use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("no asymptotic state: {0}")]
    NoSteadyState(String),

    #[error("non-finite value at step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },

    #[error("stability bound violated: dt = {dt} exceeds {limit}")]
    Unstable { dt: f64, limit: f64 },

    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for numeric failures (NaN, instability), as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NonFinite { .. } | Error::Unstable { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
