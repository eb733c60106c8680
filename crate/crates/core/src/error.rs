use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A randomized generator ran out of attempts (or its parameters are
    /// infeasible to begin with).
    #[error("generation failed after {attempts} attempts: {reason}")]
    FailedToGenerate { reason: String, attempts: u64 },

    /// Malformed input file.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A vertex id or colour outside its declared range.
    #[error("out of range: {0}")]
    Range(String),

    /// Structural validation failure (bad edge arity, duplicate edge, ...).
    #[error("invalid hypergraph: {0}")]
    Invalid(String),

    /// Two objects that must live on the same hypergraph/colour set do not.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// The dense state space q^n is larger than the configured budget.
    #[error("state space of {states} states exceeds budget {budget}")]
    BudgetExceeded { states: u128, budget: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
