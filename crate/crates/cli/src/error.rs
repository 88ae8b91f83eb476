use std::io;
use std::path::PathBuf;

use piv_core::PivError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Engine(#[from] PivError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("verification failed\n{0}")]
    Verification(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 for bad input, 3 for degenerate math, 4 for
    /// I/O and 5 for a failed verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Engine(PivError::DegenerateSpread | PivError::SingularDesign { .. }) => 3,
            CliError::Engine(_) => 2,
            CliError::Io { .. } => 4,
            CliError::Verification(_) => 5,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
