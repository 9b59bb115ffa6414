use std::fmt;
use std::process::ExitCode;

use crowdfuse::data::DataError;
use crowdfuse::metrics::MetricsError;
use crowdfuse::sim::{SimError, SpecFileError};
use crowdfuse::FusionError;

/// Failure of a run, split by exit code: 1 for anything the user can fix in
/// the inputs or flags, 2 for filesystem trouble.
#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Invalid(_) => ExitCode::from(1),
            CliError::Io(_) => ExitCode::from(2),
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

fn from_csv(context: &str, e: &csv::Error) -> CliError {
    let msg = if context.is_empty() {
        e.to_string()
    } else {
        format!("{context}: {e}")
    };
    if e.is_io_error() {
        CliError::Io(msg)
    } else {
        CliError::Invalid(msg)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        match &e {
            DataError::Io { .. } => CliError::Io(e.to_string()),
            DataError::Csv { path, source } => from_csv(path, source),
            DataError::Invalid(_) => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match &e {
            SimError::Csv(inner) => from_csv("", inner),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::Io { .. } => CliError::Io(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<SpecFileError> for CliError {
    fn from(e: SpecFileError) -> Self {
        match e {
            SpecFileError::Io { .. } => CliError::Io(e.to_string()),
            SpecFileError::Sim(inner) => inner.into(),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<FusionError> for CliError {
    fn from(e: FusionError) -> Self {
        CliError::Invalid(e.to_string())
    }
}
