use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    Dimension {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },

    #[error("index {index} out of range (len {len})")]
    Index { index: usize, len: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("feedback error: {0}")]
    Feedback(String),

    #[error("ingestion error at row {row}, column {col}: {msg}")]
    Ingestion { row: usize, col: usize, msg: String },

    #[error("best-response starts disagree by {spread:e} (> {limit:e}); equilibrium may not be unique")]
    UniquenessViolation { spread: f64, limit: f64 },

    #[error("undefined slope: {0}")]
    UndefinedSlope(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable tag, used in CLI error documents.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Dimension { .. } => "dimension",
            Error::Index { .. } => "index",
            Error::Degenerate(_) => "degenerate",
            Error::Protocol(_) => "protocol",
            Error::Numeric(_) => "numeric",
            Error::Feedback(_) => "feedback",
            Error::Ingestion { .. } => "ingestion",
            Error::UniquenessViolation { .. } => "uniqueness_violation",
            Error::UndefinedSlope(_) => "undefined_slope",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
