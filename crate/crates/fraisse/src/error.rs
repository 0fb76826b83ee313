use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A documented precondition of an operation does not hold.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Input data is not a well-formed graph, morphism, complex or chain.
    #[error("malformed input at {path}: {message}")]
    MalformedInput { path: String, message: String },

    /// An exhaustive search or construction would exceed its configured bound.
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// A search for a lifting or extension terminated without a witness.
    #[error("witness not found: {0}")]
    WitnessNotFound(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("level {level} out of range (tower depth {depth})")]
    LevelOutOfRange { level: usize, depth: usize },

    /// A constructed object failed its post-condition check.
    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn malformed(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::MalformedInput {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn contract(message: impl Into<String>) -> Self {
        Error::ContractViolation(message.into())
    }
}
