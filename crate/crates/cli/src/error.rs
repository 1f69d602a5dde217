use std::path::PathBuf;

use thiserror::Error;

/// Exit status for bad configuration, input files or I/O.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for numerical failures, including failed `--verify` checks.
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{}:{line}: {msg}", path.display())]
    OperatorFile { path: PathBuf, line: usize, msg: String },

    #[error("cannot access {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] quench_core::Error),

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::OperatorFile { .. } | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Core(e) if e.is_input_error() => EXIT_CONFIG,
            CliError::Core(_) | CliError::Verification(_) => EXIT_NUMERIC,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
