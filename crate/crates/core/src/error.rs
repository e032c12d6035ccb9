use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid arguments: {0}")]
    InvalidArgs(String),

    #[error("monomials over different numbers of variables ({0} vs {1})")]
    ArityMismatch(usize, usize),

    #[error("degree mismatch: expected degree {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("resource limit exceeded: {what} = {requested} > {limit}")]
    ResourceLimit {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("direct-sum decomposition failed: {0}")]
    DecompositionFailure(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
