use thiserror::Error;

/// Errors produced by the library.
///
/// The variants are grouped by how a caller is expected to react: `Input` and
/// `Parse` mean the request itself was malformed, `Precondition` means a
/// hypothesis of a decision procedure does not hold for the given instance, and
/// `Resource` means a configured size limit was hit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub(crate) fn parse(line: usize, column: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
