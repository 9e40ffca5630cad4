use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A numerical check ran and did not meet its tolerance.
    #[error("check failed: {0}")]
    Check(String),

    #[error(transparent)]
    Core(riesz_core::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Check(_) => 3,
            CliError::Io { .. } => 1,
            CliError::Core(e) => match e {
                riesz_core::Error::Domain { .. }
                | riesz_core::Error::InvalidArgument(_)
                | riesz_core::Error::Config(_)
                | riesz_core::Error::Mesh(_)
                | riesz_core::Error::Parse { .. }
                | riesz_core::Error::DimensionMismatch { .. } => 2,
                _ => 1,
            },
        }
    }
}

impl From<riesz_core::Error> for CliError {
    fn from(e: riesz_core::Error) -> Self {
        match e {
            riesz_core::Error::Io { path, source } => CliError::Io { path, source },
            e => CliError::Core(e),
        }
    }
}
