use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("data mismatch: {0}")]
    Data(String),

    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit code: 1 failed check, 2 configuration, 3 I/O, 4 data.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::ChecksFailed(_) => 1,
            Self::Config(_) => 2,
            Self::Io { .. } => 3,
            Self::Data(_) => 4,
        }
    }
}


pub type CliResult<T> = std::result::Result<T, CliError>;
