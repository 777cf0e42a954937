use std::path::PathBuf;

use thiserror::Error;

/// Failure of a CLI run, mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in {source_name}: {message}")]
    Config {
        source_name: String,
        message: String,
    },

    #[error("basis of {size} functions at M = {cutoff} exceeds the guard of {limit}; pass --force to run anyway")]
    Resource {
        cutoff: u32,
        size: usize,
        limit: usize,
    },

    #[error("{failed} solve(s) did not converge; partial results written to {}", out.display())]
    Convergence { failed: usize, out: PathBuf },

    #[error(transparent)]
    Core(#[from] cuspwave::Error),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn config(source_name: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Config {
            source_name: source_name.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Convergence { .. } => 3,
            CliError::Core(cuspwave::Error::NotConverged { .. }) => 3,
            CliError::Resource { .. } => 4,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
