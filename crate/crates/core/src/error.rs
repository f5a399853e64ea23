use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Error, Debug)]
pub enum Error {
    /// An argument or value violates a documented invariant.
    #[error("rejected input: {0}")]
    InvalidInput(String),

    #[error("ingestion error in {path} at row {row}, column '{column}': {message}")]
    Ingest {
        path: PathBuf,
        /// 1-based line number in the file (the header is line 1).
        row: usize,
        column: String,
        message: String,
    },

    #[error("task mismatch: expected {expected}, found {found}")]
    TaskMismatch { expected: String, found: String },

    #[error("feature index {index} out of range for {n_features} features")]
    FeatureOutOfRange { index: usize, n_features: usize },

    #[error("unknown feature '{name}'; available: {}", available.join(", "))]
    UnknownFeature { name: String, available: Vec<String> },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("unsupported model file version {found} (expected {expected})")]
    ModelVersion { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Short machine-parseable category, used as a prefix by front ends.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::Ingest { .. } => "ingest",
            Error::TaskMismatch { .. } => "task-mismatch",
            Error::FeatureOutOfRange { .. } => "feature-out-of-range",
            Error::UnknownFeature { .. } => "unknown-feature",
            Error::Fit(_) => "fit",
            Error::Calibration(_) => "calibration",
            Error::ModelVersion { .. } => "model-version",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
