use std::path::{Path, PathBuf};

use rucb_core::bounds::BoundError;
use rucb_core::condorcet::SubsetError;
use rucb_core::posterior::PosteriorError;
use rucb_core::{MatrixError, RunError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Subset(#[from] SubsetError),
    #[error(transparent)]
    Posterior(#[from] PosteriorError),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn parse(path: &Path, message: impl ToString) -> Self {
        HarnessError::Parse {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }

    /// 1 for bad input, 2 for a failed verification, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Io { .. } => 3,
            HarnessError::Posterior(PosteriorError::VerificationFailure { .. }) => 2,
            _ => 1,
        }
    }
}
