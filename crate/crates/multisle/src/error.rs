//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input outside an operation's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical procedure lost accuracy or failed to converge.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// A collision sequence that no non-crossing pairing can produce;
    /// signals a discretization failure upstream.
    #[error("inconsistent collision sequence: {0}")]
    Inconsistency(String),
    /// Aggregate failure of a Monte-Carlo run (e.g. too many failed samples).
    #[error("harness error: {0}")]
    Harness(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
