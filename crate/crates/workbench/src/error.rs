//! CLI error classification and exit codes.
//!
//! Exit codes: 0 success, 1 usage, 2 data/config error, 3 runtime fault.

use std::fmt;

use bldc_core::Error as CoreError;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Fault(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Fault(_) => 3,
        }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "error: {m}"),
            CliError::Fault(m) => write!(f, "fault: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match &e {
            CoreError::Config(_)
            | CoreError::Format(_)
            | CoreError::Domain(_)
            | CoreError::Contract(_)
            | CoreError::InsufficientData { .. } => CliError::Data(e.to_string()),
            CoreError::SimFault { .. }
            | CoreError::TrainingDiverged { .. }
            | CoreError::Estimation(_)
            | CoreError::LossOfLock { .. } => CliError::Fault(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
