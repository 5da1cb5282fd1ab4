use thiserror::Error;

/// Errors emitted by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix/vector argument had the wrong shape for the operation.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        got: String,
    },

    /// An argument value outside the accepted domain (empty input, bad
    /// fraction, rank out of range, missing context, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A numerical routine failed (non-convergence, divergence, loss of
    /// finiteness). Never swallowed into garbage output.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Configuration document problems (unknown keys, missing seed, ...).
    #[error("config error: {0}")]
    Config(String),

    /// A file did not round-trip: bad magic, truncation, malformed payload.
    #[error("corrupt file {path}: {reason}")]
    Corrupt { path: String, reason: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dims(
        context: &'static str,
        expected: impl Into<String>,
        got: impl Into<String>,
    ) -> Self {
        Error::DimensionMismatch {
            context,
            expected: expected.into(),
            got: got.into(),
        }
    }

    /// Process exit code for the CLI: 1 usage/config, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Numerical(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
