use std::fmt;
use std::process::ExitCode;

/// Failure of a command, classified by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or schema-invalid input, or invalid configuration.
    Input(String),
    /// A pipeline operation failed on valid input.
    Compute { op: &'static str, source: qle_core::Error },
    Io(std::io::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        Self::Input(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::Input(_) | Self::Io(_) => ExitCode::from(2),
            Self::Compute { .. } => ExitCode::from(1),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Input(msg) => write!(f, "input error: {msg}"),
            Self::Compute { op, source } => write!(f, "{op} failed: {source}"),
            Self::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

/// Attaches the operation name to a pipeline error.
pub trait OpContext<T> {
    fn op(self, op: &'static str) -> CliResult<T>;
}

impl<T> OpContext<T> for qle_core::Result<T> {
    fn op(self, op: &'static str) -> CliResult<T> {
        self.map_err(|source| CliError::Compute { op, source })
    }
}
