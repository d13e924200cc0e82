use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot read input: {0}")]
    Input(#[source] std::io::Error),
    #[error(transparent)]
    Lib(#[from] focusopt::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// 1 check failure or I/O, 2 usage, 3 accuracy.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Input(_) => 1,
            CliError::Usage(_) | CliError::Parse { .. } => 2,
            CliError::Lib(e) => match e {
                focusopt::Error::Accuracy(_) | focusopt::Error::Iteration { .. } => 3,
                focusopt::Error::Domain(_) | focusopt::Error::Bracket { .. } => 2,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
