use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("instance space mismatch: expected size {expected}, found {found}")]
    SpaceMismatch { expected: usize, found: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid hypothesis class: {0}")]
    InvalidClass(String),

    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("size cap exceeded: {0}")]
    CapExceeded(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn check_space(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::SpaceMismatch { expected, found })
        }
    }
}
