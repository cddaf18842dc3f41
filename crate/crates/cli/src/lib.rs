//! Front end for `.mcdp` models: solve queries, sweep grids, export diagrams, trees and traces.
//!
//! Everything here is deterministic: identical invocations produce identical bytes, and sweeps
//! emit rows in grid order regardless of how grid points were scheduled.

pub mod export;
pub mod quantity;
pub mod query;
pub mod sweep;

use std::fmt;
use std::path::Path;

use mcdp_core::lang::{compile_file, CompiledModel, LangError};

/// Process exit codes.
pub mod exit {
    /// Converged or infeasible; infeasibility is an answer.
    pub const OK: i32 = 0;
    /// Compile errors, bad arguments, I/O.
    pub const ERROR: i32 = 1;
    /// A loop hit its iteration budget; the printed antichain is only a lower bound.
    pub const ITERATION_CAP: i32 = 2;
}

#[derive(Debug)]
pub enum CliError {
    Compile(LangError),
    Usage(String),
    Core(mcdp_core::Error),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Compile(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Core(e) => write!(f, "error: {e}"),
            CliError::Io(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<LangError> for CliError {
    fn from(e: LangError) -> Self {
        CliError::Compile(e)
    }
}

impl From<mcdp_core::Error> for CliError {
    fn from(e: mcdp_core::Error) -> Self {
        CliError::Core(e)
    }
}

pub fn load(path: &Path) -> Result<CompiledModel, CliError> {
    Ok(compile_file(path)?)
}
