//! Experiment orchestration, result store and file formats around
//! [`rydkick_core`].

pub mod analyze;
pub mod config;
pub mod format;
pub mod manifest;
pub mod report;
pub mod run;

pub use config::{EngineChoice, ExperimentConfig};
pub use manifest::{Manifest, TaskStatus};
pub use run::{resume, run_experiment, RunOptions};

use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("malformed {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] rydkick_core::Error),

    #[error("configuration differs from the stored run:\n{0}")]
    ConfigMismatch(String),

    #[error("{0} already holds a run; use resume")]
    Occupied(PathBuf),

    #[error("{failed} of {total} tasks failed")]
    TasksFailed { failed: usize, total: usize },
}

impl Error {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn format(path: &Path, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
