use std::path::PathBuf;

use maad_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: parse error at row {row}: {msg}")]
    Parse { path: PathBuf, row: u64, msg: String },
    #[error("{path}: schema error: {msg}")]
    Schema { path: PathBuf, msg: String },
    #[error("{path}: row {row}: timestamp {timestamp} is off the 10 Hz grid by {offset_ms:.3} ms")]
    Grid { path: PathBuf, row: u64, timestamp: f64, offset_ms: f64 },
    #[error("unsupported checkpoint format version {found} (expected {expected})")]
    VersionMismatch { found: String, expected: u32 },
    #[error("checkpoint holds architecture `{found}`, caller requested `{expected}`")]
    ArchitectureMismatch { expected: String, found: String },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl DataError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DataError::Io { path: path.into(), source }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        DataError::Json { path: path.into(), source }
    }
}
