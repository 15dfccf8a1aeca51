use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{file}:{line}:{column}: field `{path}`: {message}")]
    Json {
        file: String,
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid model: `{path}`: {message}")]
    Model { path: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Library(#[from] supersample::Error),
    /// Checks or sampling runs that completed but failed.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 1 for failed checks and runs, 2 for bad input.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Library(_) | CliError::Failed(_) => 1,
            _ => 2,
        }
    }
}

pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
