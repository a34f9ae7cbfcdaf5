use thiserror::Error;

/// Errors produced anywhere in the optimization stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CcError {
    #[error("unknown benchmark id `{0}`")]
    UnknownBenchmark(String),

    #[error("invalid benchmark shape: {0}")]
    InvalidShape(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("coordinate {index} = {value} outside [{lower}, {upper}]")]
    OutOfBounds {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("evaluation budget exhausted ({used}/{max} FEs)")]
    BudgetExhausted { used: u64, max: u64 },

    #[error("problem carries no group-structure metadata")]
    MissingMetadata,

    #[error("unknown decomposer `{0}`")]
    UnknownDecomposer(String),

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("too few distinct abscissae for degree {degree}: need {needed}, have {have}")]
    TooFewPoints {
        degree: usize,
        needed: usize,
        have: usize,
    },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for CcError {
    fn from(err: std::io::Error) -> Self {
        CcError::Io(err.to_string())
    }
}

impl From<serde_json::Error> for CcError {
    fn from(err: serde_json::Error) -> Self {
        CcError::Io(err.to_string())
    }
}

impl From<csv::Error> for CcError {
    fn from(err: csv::Error) -> Self {
        CcError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CcError>;
