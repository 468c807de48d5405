use std::path::PathBuf;

use sciscore_core::aggregate::AggregateError;
use sciscore_core::recovery::RecoveryError;
use sciscore_core::registry::{LiteratureError, RegistryError};
use sciscore_core::CurveError;

/// Harness errors. A trial's scientific failure is never one of these; it is
/// recorded in the trial's scores.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: malformed manifest: {message}", path.display())]
    ManifestParse { path: PathBuf, message: String },
    #[error("task {task_id}: reference curve {} not found", path.display())]
    ReferenceMissing { task_id: String, path: PathBuf },
    #[error("task {task_id}: reference curve {}: {source}", path.display())]
    InvalidReference {
        task_id: String,
        path: PathBuf,
        #[source]
        source: CurveError,
    },
    #[error("threshold `{name}` must lie in {range}, got {value}")]
    InvalidThreshold {
        name: String,
        value: f64,
        range: &'static str,
    },
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Literature(#[from] LiteratureError),
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
    #[error(transparent)]
    Recovery(#[from] RecoveryError),
    #[error("{0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io { .. } => EXIT_IO,
            _ => EXIT_CONFIG,
        }
    }
}
