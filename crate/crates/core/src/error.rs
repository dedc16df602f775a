use std::path::PathBuf;

use thiserror::Error;

use crate::milp::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed instance or solution JSON. `field` is the path to the
    /// offending value (e.g. `facilities[2].capacity`).
    #[error("parse error at line {line}, column {column} (field `{field}`): {message}")]
    Json {
        line: usize,
        column: usize,
        field: String,
        message: String,
    },

    #[error("LP file parse error at line {line}: {message}")]
    LpParse { line: usize, message: String },

    #[error("model build error: {0}")]
    Build(String),

    #[error("solution violates {} constraint(s); first: {}", .0.len(), .0.first().map(|v| v.to_string()).unwrap_or_default())]
    Infeasible(Vec<Violation>),

    #[error("search space too large: {count} candidate assignments exceed the limit of {limit}")]
    SearchSpace { count: u128, limit: u128 },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
