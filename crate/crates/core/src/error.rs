use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("sharpe ratio undefined: zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("singular design matrix ({rows}x{cols})")]
    Singular { rows: usize, cols: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("incomplete transition table: state {state} has no observations")]
    IncompleteTable { state: usize },

    #[error("block size calibration failed; rejection rates: {rates:?}")]
    Calibration { rates: Vec<(usize, f64)> },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
