use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed graph or pattern input. `line` is 1-based; 0 means the
    /// error is not tied to a line.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The pattern cannot be planned (e.g. it is disconnected).
    #[error("plan error: {0}")]
    Plan(String),

    /// An input exceeds a size limit of the requested operation.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Caller violated an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(String),
}
