use thiserror::Error;

/// Errors produced by corpus ingestion, similarity computation, graph
/// partitioning, and partition evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("duplicate tweet id: {0}")]
    DuplicateId(String),

    #[error("tweet {id} timestamp {ts} outside corpus window {start}..={end}")]
    OutsideWindow {
        id: String,
        ts: i64,
        start: chrono::NaiveDate,
        end: chrono::NaiveDate,
    },

    #[error("malformed registry row {line}: {reason}")]
    MalformedRow { line: usize, reason: String },

    #[error("owner graph contains a cycle through {0}")]
    OwnerCycle(String),

    #[error("owner {0} has multiple parents in the owner graph")]
    MultipleParents(String),

    #[error("similarity matrix contract violated: {0}")]
    MatrixContract(String),

    #[error("no evaluable outlets after filtering")]
    NoEvaluableOutlets,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
