use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input document; `location` is a JSON path, XML element or line reference.
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("validation error for {element}: {message}")]
    Validation { element: String, message: String },

    #[error("unsupported feature: {0}")]
    Unsupported(String),

    #[error("unknown place {0}")]
    UnknownPlace(String),

    #[error("unknown transition {0}")]
    UnknownTransition(String),

    #[error("{transition} not enabled: place {place} has no token")]
    NotEnabled { transition: String, place: String },

    #[error("value {value} outside domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("capacity exceeded: {what} limit {limit} (frontier size {frontier})")]
    Capacity {
        what: &'static str,
        limit: usize,
        frontier: usize,
    },

    #[error("no alignment: final marking unreachable after exploring {explored} markings")]
    NoAlignment { explored: usize },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn validation(element: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            element: element.into(),
            message: message.into(),
        }
    }
}
