use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("alphabet must have at least one symbol")]
    EmptyAlphabet,

    #[error("alphabet labels: {0}")]
    InvalidLabels(String),

    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    /// A row of a conditional pmf (or a channel/aux file matrix) failed validation.
    #[error("{what}: row {row}: {reason}")]
    InvalidRow {
        what: String,
        row: usize,
        reason: String,
    },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable `{0}` appears more than once")]
    DuplicateVariable(String),

    #[error("variable groups overlap on `{0}`")]
    OverlappingGroups(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("parse error: {0}")]
    Parse(String),
}
