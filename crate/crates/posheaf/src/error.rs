use thiserror::Error;

/// Crate-wide error type.
///
/// The three variants are the crate's whole failure taxonomy and map onto the
/// CLI exit codes: rejected inputs exit with 2, failed verifications with 1.
/// `Internal` marks a broken invariant that inputs cannot legally cause.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn verification(msg: impl Into<String>) -> Self {
        Error::Verification(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}
