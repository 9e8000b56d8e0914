use thiserror::Error;

use crate::formula::Literal;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid document: {0}")]
    Schema(String),

    #[error("interpretation is inconsistent: contains both {0} and its negation")]
    Inconsistent(Literal),

    #[error("constraints together with the initial facts are unsatisfiable")]
    UnsatisfiableBase,

    #[error("index {index} out of range for a formula of {len} clauses")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("hard clauses are unsatisfiable")]
    HardUnsatisfiable,

    #[error("brute-force limit exceeded: {size} clauses > {limit}")]
    BruteForceLimit { size: usize, limit: usize },

    #[error("internal inconsistency: {0}")]
    Internal(String),

    #[error("time limit reached")]
    Timeout,

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
