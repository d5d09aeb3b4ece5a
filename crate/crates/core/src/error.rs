use thiserror::Error;

/// Errors produced by the recommender pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A log line could not be parsed. Carries the 1-based line number so
    /// callers can decide between skipping and aborting.
    #[error("line {line}: {reason}")]
    LogParse { line: usize, reason: String },

    /// Pruning or splitting left an empty matrix dimension.
    #[error("dataset too sparse: {0}")]
    TooSparse(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unknown user: {0}")]
    UnknownUser(String),

    #[error("unknown strategy '{0}' (expected one of: {1})")]
    UnknownStrategy(String, String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A persisted matrix / knowledge-base file failed validation.
    #[error("format error: {0}")]
    Format(String),

    /// An online request contained no page known to the knowledge base.
    #[error("no recognizable pages in request")]
    NoRecognizablePages,

    #[error("no evaluable test users")]
    NoEvaluableUsers,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
