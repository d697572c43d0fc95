//! Command failures and their exit codes.

use std::path::Path;

use hexpgs::arena::ArenaError;
use hexpgs::exit::ExitError;
use hexpgs::hex::HexError;
use hexpgs::net::NetError;
use hexpgs::search::SearchError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flag values, caught before any work starts.
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    File { path: String, message: String },
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Exit(#[from] ExitError),
    #[error(transparent)]
    Arena(#[from] ArenaError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Hex(#[from] HexError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }

    pub fn file(path: &Path, message: impl ToString) -> CliError {
        CliError::File {
            path: path.display().to_string(),
            message: message.to_string(),
        }
    }

    pub fn usage(message: impl ToString) -> CliError {
        CliError::Usage(message.to_string())
    }
}

pub fn load_net(path: &Path) -> Result<hexpgs::Net, CliError> {
    hexpgs::net::load(path, None).map_err(|e| CliError::file(path, e))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::file(path, e))
}
