use thiserror::Error;

/// Errors surfaced by the library.
///
/// Resource errors are kept separate from domain errors: when a search would
/// exceed its configured budget, callers get `ResourceCap` rather than a
/// silently truncated (and therefore wrong) answer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("resource cap exceeded: {needed} units needed, cap is {cap}")]
    ResourceCap { needed: u64, cap: u64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Error {
        Error::InvalidInput(msg.into())
    }
}
