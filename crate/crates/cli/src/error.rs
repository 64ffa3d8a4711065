use std::path::PathBuf;

use thiserror::Error;

/// Fatal command errors. Each variant maps to a process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("input error: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("{0}")]
    EmptyPool(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::EmptyPool(_) => 4,
        }
    }

    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl From<egoseg_core::Error> for CliError {
    fn from(e: egoseg_core::Error) -> Self {
        use egoseg_core::Error as E;
        match e {
            E::InvalidParameter { .. } => CliError::Config(e.to_string()),
            E::EmptyBackgroundPool(_) => CliError::EmptyPool(e.to_string()),
            E::DimensionMismatch(_) | E::InvalidDimensions { .. } | E::BufferLength { .. } => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Io(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) fn create_dir(path: &PathBuf) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}
