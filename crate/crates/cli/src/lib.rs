//! Command-line front end for `mimo-hwi`: single evaluations, parameter
//! sweeps and the reference tables and figures, emitted as CSV or JSON
//! lines.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod figures;
pub mod output;
pub mod selftest;

use std::fmt;
use std::io;

/// Failure of a command, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or an unwritable output path (exit 2).
    Usage(String),
    /// Error raised by the library; numerical failures exit 3, rejected
    /// inputs exit 2.
    Library(mimo_hwi::Error),
    /// Self-test checks that did not pass (exit 3).
    SelftestFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Library(e) if e.is_numerical() => 3,
            CliError::Library(_) => 2,
            CliError::SelftestFailed(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "UsageError: {msg}"),
            CliError::Library(e) => write!(f, "{}: {e}", e.kind()),
            CliError::SelftestFailed(n) => write!(f, "SelftestFailed: {n} check(s) failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<mimo_hwi::Error> for CliError {
    fn from(e: mimo_hwi::Error) -> Self {
        CliError::Library(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Usage(format!("i/o: {e}"))
    }
}
