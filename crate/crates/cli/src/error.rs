use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("{0}")]
    InvalidConfig(String),

    #[error("coverage: {0}")]
    Coverage(qh_core::Error),

    #[error("solver: {0}")]
    Solver(#[from] qh_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Stable machine-readable category.
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config { .. } | CliError::InvalidConfig(_) => "config",
            CliError::Coverage(_) => "coverage",
            CliError::Solver(_) => "solver",
            CliError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::InvalidConfig(_) => 2,
            CliError::Coverage(_) => 3,
            CliError::Solver(_) => 4,
            CliError::Io { .. } => 5,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
