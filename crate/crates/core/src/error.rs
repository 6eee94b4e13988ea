use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("operation requires a deterministic machine")]
    NondeterministicInput,

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("language is not prefix-free")]
    NotPrefixFree,

    #[error("decision procedures require a finite reversal bound")]
    InfiniteBudget,

    #[error("alphabet mismatch: {left:?} vs {right:?}")]
    AlphabetMismatch { left: Vec<char>, right: Vec<char> },

    #[error("symbol {0:?} is not in the alphabet")]
    SymbolOutsideAlphabet(char),

    #[error("unknown corpus entry {0:?}")]
    UnknownEntry(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::PreconditionViolated(msg.into())
}
