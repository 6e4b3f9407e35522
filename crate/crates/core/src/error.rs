use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("node index {index} out of range 1..={n}")]
    IndexOutOfRange { index: u64, n: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no interior stationary point: {0}")]
    NoStationaryPoint(String),

    #[error("giant component has {0} node(s), need at least 2")]
    GiantTooSmall(usize),

    #[error("malformed graph file at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
