use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] dic_core::error::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("frame: {0}")]
    Frame(String),
    #[error("store: {0}")]
    Store(String),
    #[error("server replied with error: {0}")]
    Remote(String),
    #[error("unexpected reply: {0}")]
    Unexpected(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
