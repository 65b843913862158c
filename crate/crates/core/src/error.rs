use thiserror::Error;

/// Errors raised by samplers, tensor operations, estimators and studies.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Shapes of the arguments do not fit together.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A dense materialization would exceed the configured entry cap.
    #[error("resource limit: {what} needs {requested} entries, cap is {cap}")]
    Resource {
        what: &'static str,
        requested: u128,
        cap: u128,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn dimension(msg: impl Into<String>) -> Error {
    Error::Dimension(msg.into())
}
