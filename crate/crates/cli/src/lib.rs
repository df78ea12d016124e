//! Library side of the `pilotplan` command-line tool. Each subcommand is a
//! plain function returning serializable records, so the integration tests
//! drive exactly what the binary prints.

pub mod cache;
pub mod commands;
pub mod config;
pub mod reproduce;
pub mod verify;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("empty coherence-time range {0}")]
    EmptyRange(String),
    #[error("infeasible coherence time: {0}")]
    Infeasible(String),
    #[error("{0}")]
    Mismatch(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] pilotplan::Error),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::EmptyRange(_) | CliError::Core(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Mismatch(_) | CliError::Io(_) => 1,
        }
    }
}
