use thiserror::Error;

/// Errors produced while loading automata or building and solving games.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// The instance document is not well-formed JSON or does not match the schema.
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    /// The document parsed but describes an invalid automaton.
    #[error("invalid automaton at {location}: {message}")]
    Semantic { location: String, message: String },

    /// A letter or state index outside the automaton's alphabets or state space.
    #[error("{what} index {index} out of range (size {size})")]
    OutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },

    /// A symbol name that does not belong to the alphabet.
    #[error("unknown symbol {symbol:?} in {alphabet}")]
    UnknownSymbol {
        symbol: String,
        alphabet: &'static str,
    },

    /// A configured size budget was exceeded.
    #[error("resource limit exceeded: {resource} exceeds {limit}{}", context.as_deref().map(|c| format!(" ({c})")).unwrap_or_default())]
    ResourceLimit {
        resource: &'static str,
        limit: u64,
        context: Option<String>,
    },
}

impl Error {
    pub(crate) fn semantic(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Semantic {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn resource(resource: &'static str, limit: u64) -> Self {
        Error::ResourceLimit {
            resource,
            limit,
            context: None,
        }
    }

    /// Attaches a context note to a resource-limit error; other variants pass through.
    pub fn with_context(self, note: impl Into<String>) -> Self {
        match self {
            Error::ResourceLimit {
                resource, limit, ..
            } => Error::ResourceLimit {
                resource,
                limit,
                context: Some(note.into()),
            },
            other => other,
        }
    }

    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::ResourceLimit { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
