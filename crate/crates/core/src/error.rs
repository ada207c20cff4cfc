//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

use crate::mlp::TrainHistory;

#[derive(Debug, Clone)]
pub enum Error {
    /// Input outside an operation's documented domain.
    Domain(String),
    /// Invalid configuration or parameter set.
    Config(String),
    /// Malformed or inconsistent input data (timestamps, columns, shapes).
    Format(String),
    /// Shape or topology mismatch between caller and callee.
    Contract(String),
    /// Simulation produced a non-finite state.
    SimFault { time: f64, detail: String },
    /// A windowed operation was handed fewer samples than it needs.
    InsufficientData { needed: usize, got: usize },
    /// Training cost became non-finite; the partial history is attached.
    TrainingDiverged { epoch: usize, history: TrainHistory },
    /// Non-finite features or model outputs during inference.
    Estimation(String),
    /// The sensorless loop saw too many consecutive unknown states.
    LossOfLock { cycles: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Format(msg) => write!(f, "format error: {msg}"),
            Error::Contract(msg) => write!(f, "contract violation: {msg}"),
            Error::SimFault { time, detail } => {
                write!(f, "simulation fault at t={time:.9}s: {detail}")
            }
            Error::InsufficientData { needed, got } => {
                write!(f, "insufficient data: needed {needed}, got {got}")
            }
            Error::TrainingDiverged { epoch, .. } => {
                write!(f, "training diverged at epoch {epoch}")
            }
            Error::Estimation(msg) => write!(f, "estimation fault: {msg}"),
            Error::LossOfLock { cycles } => {
                write!(f, "loss of lock after {cycles:.1} mechanical cycles")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
