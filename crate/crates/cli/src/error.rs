use std::fmt;

use panelcausal::ErrorKind;

/// Failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Usage,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Data,
            message: message.into(),
        }
    }

    /// 1 usage/config, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Usage => 1,
            ErrorKind::Data => 2,
            ErrorKind::Numerical => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<panelcausal::Error> for CliError {
    fn from(e: panelcausal::Error) -> Self {
        CliError {
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}
