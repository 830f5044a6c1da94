use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The time grid cannot resolve the scatterer response.
    #[error("grid too coarse: dt*kappa = {dt_kappa:.4} exceeds {limit}")]
    Resolution { dt_kappa: f64, limit: f64 },

    #[error("numerical failure in {routine}: {detail}")]
    NumericalFailure { routine: &'static str, detail: String },

    #[error("protocol order violated: {0}")]
    ProtocolOrder(String),

    #[error("state invariant violated: {0}")]
    InvariantViolation(String),

    #[error("data register mode mismatch: expected {expected}, found {found}")]
    ModeMismatch { expected: &'static str, found: &'static str },

    #[error("unknown excitation id {0}")]
    UnknownExcitation(usize),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
