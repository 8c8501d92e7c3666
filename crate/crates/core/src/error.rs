use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid duel query ({i}, {j}) on {k} arms")]
    InvalidQuery { i: usize, j: usize, k: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid sparsity for arm {arm}: s = {s}, admissible range 1..={max}")]
    InvalidSparsity { arm: usize, s: usize, max: usize },

    #[error("instance has no strict Condorcet winner")]
    NoCondorcetWinner,

    #[error("degenerate instance: suboptimal arm {0} has no strictly negative gap")]
    DegenerateInstance(usize),

    #[error("budget {budget} below the minimum {minimum} required for {k} arms")]
    Underbudget { budget: u64, minimum: u64, k: usize },

    #[error("no certification after {} doubling stages ({budget_used} queries)", stages.len())]
    Nontermination {
        stages: Vec<crate::identify::StageRecord>,
        budget_used: u64,
    },

    #[error("malformed matrix: {0}")]
    MalformedMatrix(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
