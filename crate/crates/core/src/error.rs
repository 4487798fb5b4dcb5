use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("design matrix is empty")]
    EmptyMatrix,
    #[error("column {0} of the design matrix has zero norm")]
    ZeroColumn(usize),
    #[error("observation vector has zero norm")]
    ZeroObservations,
    #[error("degenerate instance: A^T b is identically zero")]
    DegenerateInstance,
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("linear system is not positive definite")]
    Factorization,
    #[error("reference solver reached its iteration cap ({0}) before tolerance")]
    ReferenceCap(usize),
    #[error("{}, line {line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
