use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0:#}")]
    Data(#[from] anyhow::Error),

    #[error("missing {}: run `factir {command}` first", path.display())]
    Dependency { command: &'static str, path: PathBuf },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Dependency { .. } => 3,
        }
    }
}

impl From<factir_core::Error> for CliError {
    fn from(e: factir_core::Error) -> Self {
        CliError::Data(e.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.into())
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
