use thiserror::Error;

/// Errors raised by the selection, learning and tracking routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invariant violated for `{field}`: {reason}")]
    InvariantViolation { field: &'static str, reason: String },

    #[error("non-finite value for `{0}`")]
    NonFinite(&'static str),

    #[error("learning pace must be positive, got {0}")]
    NonPositivePace(f64),

    #[error("prior weight must lie in (0, 1], got {0}")]
    InvalidPrior(f64),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("response map {width}x{height} too small for suppression radius {radius}")]
    MapTooSmall { width: usize, height: usize, radius: usize },

    #[error("primary peak must be positive, got {0}")]
    NonPositivePeak(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("no sample carries a positive weight")]
    AllWeightsZero,

    #[error("weighted normal equations are singular")]
    SingularSystem,

    #[error("tracker has not been initialized")]
    NotInitialized,

    #[error("frame is empty")]
    EmptyFrame,

    #[error("invalid scenario: {0}")]
    InvalidSpec(String),

    #[error("invalid config `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },
}

impl Error {
    pub(crate) fn invariant(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvariantViolation { field, reason: reason.into() }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig { field: field.into(), reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
