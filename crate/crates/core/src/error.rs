use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {k} out of range 0..={max}")]
    OutOfRange { k: usize, max: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("flow horizon exceeded: t = {t} but the run must stay below {horizon}")]
    Horizon { t: f64, horizon: f64 },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] IoError),
}

/// `std::io::Error` is neither `Clone` nor `PartialEq`; keep the rendered message.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0}")]
pub struct IoError(pub String);

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(IoError(e.to_string()))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(k: usize, max: usize) -> Result<()> {
    if k > max {
        Err(Error::OutOfRange { k, max })
    } else {
        Ok(())
    }
}
