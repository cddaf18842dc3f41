use thiserror::Error;

/// Errors raised by the kernel. Infeasibility is never an error: it is the empty antichain.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("invalid poset: {0}")]
    InvalidPoset(String),
    #[error("not an antichain: {0} and {1} are comparable")]
    NotAnAntichain(String, String),
    #[error("invalid design problem: {0}")]
    InvalidDesignProblem(String),
    #[error("invalid composition: {0}")]
    InvalidComposition(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid arc feedback set: {0}")]
    InvalidAfs(String),
    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("non-monotone step at iteration {step}: R{step} is not below R{next}", next = step + 1)]
    NonMonotoneStep { step: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
