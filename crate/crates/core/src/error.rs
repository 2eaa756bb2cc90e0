use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("invalid arguments: {0}")]
    InvalidArguments(String),

    #[error("value {value} outside domain [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },

    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),

    /// The linear-regime assumption `gamma_m > omega` (or `m > omega^2`) fails.
    #[error("regime violation: {0}")]
    Regime(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("unsupported: {0}")]
    Capability(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("experiment invalid: {0}")]
    ExperimentInvalid(String),
}

impl Error {
    pub(crate) fn shape(expected: usize, got: usize) -> Self {
        Error::Shape { expected, got }
    }
}
