use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A parity-check matrix the matching decoder cannot turn into a graph.
    #[error("unsupported matrix: column {column} has weight {weight}")]
    UnsupportedMatrix { column: usize, weight: usize },

    #[error("invalid syndrome: {0}")]
    InvalidSyndrome(String),

    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("fit failure: {0}")]
    FitFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
