use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the flood-detection pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),

    #[error("failed to decode {path}: {reason}")]
    Decode { path: PathBuf, reason: String },

    #[error("image too small: {width}x{height}, need at least {min}x{min}")]
    ImageTooSmall { width: usize, height: usize, min: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("unsupported LBP radius {0} (expected 1 or 2)")]
    InvalidRadius(usize),

    #[error("histogram is not normalized")]
    NotNormalized,

    #[error("invalid k: {0}")]
    InvalidK(usize),

    #[error("too few points for clustering: {points} points, k = {k}")]
    TooFewPoints { points: usize, k: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("reference signature holds no histograms")]
    EmptyReference,

    #[error("water mask #{0} selects no pixels")]
    EmptyMask(usize),

    #[error("invalid dropout rate {0} (must lie in [0, 1))")]
    InvalidDropout(f64),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("nothing was evaluated")]
    EmptyEvaluation,

    #[error("image has no matching mask: {0}")]
    UnpairedImage(String),

    #[error("unknown class folder: {0}")]
    UnknownClassFolder(String),

    #[error("model format error: {0}")]
    Format(String),

    #[error("model shape error: {0}")]
    Shape(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("image encoding error: {0}")]
    Encode(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::FileNotFound(path)
        } else {
            Error::Io { path, source }
        }
    }

    pub(crate) fn mismatch(expected: impl ToString, actual: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}
