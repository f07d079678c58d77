use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument: role/dimension mismatch, out-of-range parameter,
    /// grid mismatch, malformed input data.
    #[error("input error: {0}")]
    Input(String),

    /// A configured size cap was exceeded (e.g. measure support too large
    /// for subset-based distance computation).
    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed file content (CSV structure, embedded JSON payloads).
    #[error("format error: {0}")]
    Format(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
