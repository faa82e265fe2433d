use thiserror::Error;

use crate::solver::SolveResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input (ragged CSV row, non-object JSONL line, ...).
    #[error("structural error at line {line}: {message}")]
    Structural { line: u64, message: String },

    /// Field names, permutations or FD groups that do not fit the table.
    #[error("schema error: {0}")]
    Schema(String),

    #[error("index {index} out of bounds for length {len}")]
    Bounds { index: usize, len: usize },

    /// A solver or discovery routine refused to run on an input this large.
    #[error("size limit exceeded: {0}")]
    Size(String),

    /// Argument outside the operation's domain (negative counts, absent values, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The exact solver ran out of time; carries the best complete schedule
    /// found so far, which is not guaranteed optimal.
    #[error("time budget exceeded after {} recursive calls; best partial score {}", .0.stats.recursive_calls, .0.phc_score)]
    TimeBudget(Box<SolveResult>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
