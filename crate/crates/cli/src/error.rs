use std::io;

use fastslepian::persist::PersistError;
use fastslepian::SlepianError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid argument: {0}")]
    Validation(String),

    #[error(transparent)]
    Slepian(#[from] SlepianError),

    #[error(transparent)]
    Persist(#[from] PersistError),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for failures of the filesystem or output stream, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io(_) | Self::Persist(PersistError::Io(_)) => 2,
            Self::Csv(e) if e.is_io_error() => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
