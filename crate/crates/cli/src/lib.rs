//! Command-line companion to the exact region-counting library.
//!
//! Everything numeric lives in the core crate; this crate adds the parts
//! that need an operating system — configuration files, report rendering,
//! a floating-point Monte-Carlo estimator, built-in result tables, and the
//! `conv-regions` binary that ties them together.
//!
//! Module map:
//!
//! * [`config`] — JSON architecture files and inline shape flags.
//! * [`report`] — CSV/JSON rendering with identical numeric payloads.
//! * [`sampler`] — He-initialized floating-point networks and the
//!   activation-pattern region estimator.
//! * [`tables`] — built-in geometry fixtures and their reproducible tables.
//! * [`oracle_io`] — plain-text serialization of hyperplane arrangements.
//! * [`cli`] — argument parsing and command dispatch.
//!
//! Every command is deterministic given its flags: reports are byte-stable,
//! seeds fully determine sampled values, and the thread count never changes
//! a result.

use std::fmt;

pub mod cli;
pub mod config;
pub mod oracle_io;
pub mod report;
pub mod sampler;
pub mod tables;

/// A command failure, classified by how the process should exit.
///
/// Exit codes: 0 success, 2 parse (bad flags, config, or data files),
/// 3 validation (well-formed but invalid request), 4 bound hypothesis
/// violation, 5 oracle mismatch that survived a retry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CliError {
    /// A file or flag value could not be parsed.
    Parse(String),
    /// The request was understood but is invalid (shape errors, wrong layer
    /// count for the command, unknown table id, ...).
    Validation(String),
    /// A requested lower bound does not apply to the given architecture.
    Hypothesis(String),
    /// The arrangement oracle disagreed with the closed form twice.
    Mismatch(String),
}

impl CliError {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Hypothesis(_) => 4,
            CliError::Mismatch(_) => 5,
        }
    }

    /// Stable machine-readable tag for this error class.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "parse",
            CliError::Validation(_) => "validation",
            CliError::Hypothesis(_) => "hypothesis",
            CliError::Mismatch(_) => "mismatch",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Parse(m)
            | CliError::Validation(m)
            | CliError::Hypothesis(m)
            | CliError::Mismatch(m) => m,
        }
    }

    /// One-line JSON object for stderr: `{"error":{"kind":...,"message":...}}`.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": { "kind": self.kind(), "message": self.message() } })
            .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind(), self.message())
    }
}

impl std::error::Error for CliError {}

impl From<conv_regions::arch::ArchError> for CliError {
    fn from(e: conv_regions::arch::ArchError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<conv_regions::bounds::BoundsError> for CliError {
    fn from(e: conv_regions::bounds::BoundsError) -> Self {
        match e {
            conv_regions::bounds::BoundsError::Arch(inner) => inner.into(),
            violated @ conv_regions::bounds::BoundsError::HypothesisViolated { .. } => {
                CliError::Hypothesis(violated.to_string())
            }
        }
    }
}

impl From<conv_regions::oracle::OracleError> for CliError {
    fn from(e: conv_regions::oracle::OracleError) -> Self {
        match e {
            conv_regions::oracle::OracleError::Arch(inner) => inner.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Parse(e.to_string())
    }
}
