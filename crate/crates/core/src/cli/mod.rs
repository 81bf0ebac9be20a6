//! Command-line front end: configuration, the three commands and their
//! output files.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 numerical
//! failure, 4 verification thresholds exceeded.

pub mod commands;
pub mod config;
pub mod output;

use std::fmt;

pub use commands::{cmd_factorize, cmd_invert, cmd_verify, factorize, invert, Factorized};
pub use config::{load, parse, ConfigError, Method, Overrides, RunConfig};

use crate::error::Error;

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Config(ConfigError),
    Numerical(Error),
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Numerical(e) => write!(f, "{}: {e}", e.name()),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numerical(e)
    }
}
