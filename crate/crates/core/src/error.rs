use std::fmt;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument or instance violates a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A file could not be decoded.
    #[error("parse error at {location}: {message}")]
    Parse { location: Location, message: String },

    #[error("unsupported instance kind `{0}`")]
    UnsupportedKind(String),

    /// A hard cap (piece count, enumeration size, ...) was hit.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Where in an input file a parse error was detected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    /// Line and column reported by the JSON decoder.
    Text { line: usize, column: usize },
    /// A field of a decoded record that failed validation.
    Field { record: usize, field: String },
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Text { line, column } => write!(f, "line {line}, column {column}"),
            Location::Field { record, field } => write!(f, "record {record}, field `{field}`"),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
