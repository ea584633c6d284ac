use thiserror::Error;

/// Errors raised by data ingestion, validation, and the few operations that
/// can fail outright. Numerical routines that merely fail to converge do not
/// error; they return their best iterate with a diagnostic flag instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv parse error at row {row}: {msg}")]
    Csv { row: usize, msg: String },

    #[error("file contains no rows")]
    NoRows,

    #[error("row {row} has {got} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        got: usize,
    },

    #[error("row {row}: label {value} not in {{-1,+1}} or {{0,1}}")]
    BadLabel { row: usize, value: String },

    #[error("svmlight parse error at line {line}: {msg}")]
    SvmLight { line: usize, msg: String },

    #[error("svmlight line {line}: indices not increasing")]
    IndicesNotIncreasing { line: usize },

    #[error("centering requires dense column storage")]
    CenterOnSparse,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("power iteration did not converge after {0} iterations")]
    PowerIterationDiverged(usize),

    #[error("labels contain a single class; need at least one of each")]
    SingleClassLabels,

    #[error("regularization path is empty")]
    EmptyPath,
}
