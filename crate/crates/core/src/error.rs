use thiserror::Error;

/// Errors raised by the evaluation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("entry at row {row}, column {column} is {value}, expected -1 or +1")]
    NonBinaryEntry { row: usize, column: usize, value: String },

    #[error("column {column} has {found} entries, expected {expected}")]
    RaggedColumns {
        column: usize,
        expected: usize,
        found: usize,
    },

    #[error("duplicate attribute name `{0}`")]
    DuplicateName(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("cannot project an empty vector")]
    EmptyVector,

    #[error("need at least {needed} attributes, got {found}")]
    TooFewAttributes { needed: usize, found: usize },

    #[error("{required} attributes must be placed in S1 but its capacity is {capacity}")]
    ForcedSetTooLarge { required: usize, capacity: usize },

    #[error("forced attribute `{0}` does not exist")]
    UnknownForcedName(String),

    #[error("interpolation curve is empty")]
    EmptyCurve,

    #[error("value {value} outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("line {line}, column {column}: {message}")]
    Parse { line: u64, column: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
