//! CLI error type mapped onto process exit codes.

use affect_core::ecg::EcgError;
use affect_core::ensemble::EnsembleError;
use affect_core::nn::{CheckpointError, NnError};
use affect_core::seqdata::SeqError;
use affect_core::training::TrainError;
use std::fmt;
use std::path::Path;

/// Exit codes: 2 usage, 3 data, 4 numeric failure.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unknown config keys, missing required settings.
    Usage(String),
    /// Unreadable, malformed, or inconsistent data/files.
    Data(String),
    /// Non-finite loss or predictions.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    pub fn usage(msg: impl Into<String>) -> CliError {
        CliError::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> CliError {
        CliError::Data(msg.into())
    }

    /// Attaches file context to an IO error.
    pub fn io(path: &Path, e: std::io::Error) -> CliError {
        CliError::Data(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<SeqError> for CliError {
    fn from(e: SeqError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<EcgError> for CliError {
    fn from(e: EcgError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<CheckpointError> for CliError {
    fn from(e: CheckpointError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<NnError> for CliError {
    fn from(e: NnError) -> Self {
        match e {
            NnError::InvalidConfig { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<EnsembleError> for CliError {
    fn from(e: EnsembleError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::NonFiniteLoss { .. } => CliError::Numeric(e.to_string()),
            TrainError::InvalidConfig { .. } => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}
