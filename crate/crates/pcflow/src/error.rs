use thiserror::Error;

/// Failures of the runner, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum PcflowError {
    /// `path` is the dotted key path into the config, empty when the
    /// problem is not tied to a key.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("runtime failure: {0}")]
    Runtime(String),

    #[error("acceptance failure: {0}")]
    Acceptance(String),
}

impl PcflowError {
    pub fn config(path: impl Into<String>, message: impl ToString) -> Self {
        PcflowError::Config {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub fn runtime(message: impl ToString) -> Self {
        PcflowError::Runtime(message.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            PcflowError::Config { .. } => 1,
            PcflowError::Runtime(_) => 2,
            PcflowError::Acceptance(_) => 3,
        }
    }
}

impl From<std::io::Error> for PcflowError {
    fn from(e: std::io::Error) -> Self {
        PcflowError::Runtime(e.to_string())
    }
}

impl From<pcflow_core::Error> for PcflowError {
    fn from(e: pcflow_core::Error) -> Self {
        PcflowError::Runtime(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, PcflowError>;
