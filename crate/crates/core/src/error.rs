use crate::sampler::CompressionCandidate;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type.
///
/// The CLI maps these onto process exit codes: invalid input / malformed
/// data → 2, infeasible requests → 3, data integrity violations → 4.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("structural error in sentence {sentence_id}: {msg}")]
    Structure { sentence_id: String, msg: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid operation: {0}")]
    InvalidOperation(String),

    #[error("format error in section {section}: {msg}")]
    Format { section: String, msg: String },

    #[error("undefined score: {0}")]
    UndefinedScore(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("degenerate training data: {0}")]
    DegenerateData(String),

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("budget unreachable: pruned to the root with {} chars still over budget", .partial.char_length)]
    BudgetUnreachable { partial: Box<CompressionCandidate> },

    #[error("no candidate satisfies the brevity/importance constraints")]
    NoFeasibleCandidate,

    #[error("unknown compression id: {0}")]
    Lookup(String),

    #[error("split violation: {} pair(s) appear in both train and test (first: {})", .pair_ids.len(), .pair_ids.first().map(String::as_str).unwrap_or("?"))]
    SplitViolation { pair_ids: Vec<String> },

    #[error("integrity error in record {record}: {msg}")]
    Integrity { record: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Exit code the CLI uses for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoFeasibleCandidate | Error::BudgetUnreachable { .. } => 3,
            Error::SplitViolation { .. } | Error::Integrity { .. } => 4,
            _ => 2,
        }
    }
}
