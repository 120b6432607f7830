use std::path::PathBuf;

use crate::model_format::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("schema mismatch at column {column}: expected `{expected}`, found `{found}`")]
    Schema {
        /// 1-based column position.
        column: usize,
        expected: String,
        found: String,
    },

    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    #[error("line {line}: duplicate timestamp {timestamp}")]
    DuplicateTimestamp { line: u64, timestamp: String },

    #[error("dataset is empty after {stage}: {count} usable records, at least 2 required")]
    EmptyDataset { stage: &'static str, count: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("input must contain exactly {expected} elements, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("degenerate leaf: hessian sum {hessian} + lambda {lambda} is not positive")]
    DegenerateLeaf { hessian: f64, lambda: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("model artifact failed validation: {}", join_violations(.0))]
    Validation(Vec<Violation>),

    #[error("cannot lower to float32: {0}")]
    Lowering(String),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable short identifier, used as the machine-readable error prefix.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Schema { .. } => "schema",
            Error::Row { .. } => "row",
            Error::DuplicateTimestamp { .. } => "duplicate-timestamp",
            Error::EmptyDataset { .. } => "empty-dataset",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Dimension { .. } => "input-dimension",
            Error::DegenerateLeaf { .. } => "degenerate-leaf",
            Error::Numerical(_) => "numerical",
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::Lowering(_) => "lowering",
            Error::Io { .. } => "io",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
