use thiserror::Error;

/// Errors raised by the core protocol operations.
///
/// Verification failures are not errors; they are reported through
/// [`Verdict`](crate::protocol::Verdict).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("missing capability: {0}")]
    Capability(String),
    #[error("game error: {0}")]
    Game(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
