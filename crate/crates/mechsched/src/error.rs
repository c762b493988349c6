use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed textual input (CSV cost matrices, distribution specs,
    /// inline cost strings).
    #[error("parse error: {0}")]
    Parse(String),

    /// Input that parses but violates a domain invariant (non-positive
    /// costs, shape mismatches, parameters out of range).
    #[error("invalid input: {0}")]
    Domain(String),

    /// Filesystem failure while reading or writing artifacts.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
