//! Command-line front end for the sequential experiment engine: config
//! parsing, CSV serialization of campaign outputs, interim analysis of
//! observed data, and run manifests.

use thiserror::Error;

pub mod analyze;
pub mod config;
pub mod csvio;
pub mod manifest;

/// Failure classes the binary maps to exit codes: invalid input is 1,
/// runtime trouble (I/O, thread pool) is 2.
#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}
