use std::fmt;
use std::process::ExitCode;

use subseq_core::Error;

/// Failure of a subcommand, classified by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or flag values (exit 2).
    Usage(String),
    /// Unreadable or invalid dataset, config or snapshot input (exit 3).
    Input(String),
    /// Anything that went wrong while running (exit 4).
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Runtime(_) => 4,
        })
    }

    pub fn input(context: impl fmt::Display, e: impl fmt::Display) -> Self {
        CliError::Input(format!("{context}: {e}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
