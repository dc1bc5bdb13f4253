//! Commands behind the `biharm` binary: solves, Green-function sign probes
//! and verification suites, each writing stamped reports and a run manifest.

use std::fmt;
use std::path::Path;

use biharmonic_core::Error;

pub mod commands;
pub mod config;
pub mod manifest;
pub mod suites;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const CONVERGENCE: u8 = 2;
    pub const BRACKET: u8 = 3;
    pub const RESOURCES: u8 = 4;
    pub const VERIFICATION: u8 = 5;
}

/// A failure with its exit code.
#[derive(Debug, Clone)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: exit::USAGE,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::usage(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_) | Error::OutsideDomain { .. } | Error::GridTooCoarse(_) => exit::USAGE,
        Error::NotConverged { .. } | Error::Accuracy(_) | Error::Singular => exit::CONVERGENCE,
        Error::BracketViolation { .. } | Error::TruncationActive { .. } => exit::BRACKET,
        Error::MemoryBudget { .. } => exit::RESOURCES,
        Error::SignIndefinite { .. }
        | Error::Positivity(_)
        | Error::RateViolation(_)
        | Error::LowerBound(_) => exit::VERIFICATION,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let mut message = e.to_string();
        if let Error::NotConverged { trace, .. } = &e {
            let tail: Vec<String> = trace.iter().rev().take(10).rev().map(|r| format!("{r:e}")).collect();
            message.push_str(&format!("; residual trace (last {}): [{}]", tail.len(), tail.join(", ")));
        }
        Self {
            code: exit_code(&e),
            message,
        }
    }
}
