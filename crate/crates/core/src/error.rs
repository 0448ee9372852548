use thiserror::Error;

/// Failures reported by the workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at cell {0}")]
    NonFinite(usize),
    #[error("outside the grid box: {0}")]
    OutOfDomain(String),
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parameter not findable: {0}")]
    NotFindable(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by the data or the grid scale rather than by malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NotFindable(_) | Error::Numerical(_) | Error::OutOfDomain(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
