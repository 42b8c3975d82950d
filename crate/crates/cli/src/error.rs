use std::fmt;

/// Failure of a CLI command, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or scenario files, unreadable paths.
    Config(String),
    /// A core invariant failed while tracking.
    Invariant(String),
    /// One or more numerical checks exceeded their tolerance.
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Invariant(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Invariant(m) => write!(f, "invariant violation: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<pacetrack::Error> for CliError {
    fn from(e: pacetrack::Error) -> Self {
        match e {
            pacetrack::Error::InvalidConfig { .. } | pacetrack::Error::InvalidSpec(_) => CliError::Config(e.to_string()),
            other => CliError::Invariant(other.to_string()),
        }
    }
}

pub fn io_error(path: &std::path::Path, e: impl fmt::Display) -> CliError {
    CliError::Config(format!("{}: {e}", path.display()))
}
