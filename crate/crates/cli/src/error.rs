use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config:{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid config: {0}")]
    Invalid(String),

    #[error(transparent)]
    Numeric(#[from] qsuperres_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } | CliError::Invalid(_) => 2,
            CliError::Numeric(_) | CliError::Io { .. } | CliError::Output(_) => 3,
        }
    }
}
