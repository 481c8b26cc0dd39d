//! Error types shared across the toolkit.

use thiserror::Error;

/// Toolkit-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A requested design has no physical solution (e.g. negative cavity
    /// depth for the requested resonance frequency).
    #[error("infeasible design: {0}")]
    InfeasibleDesign(String),

    /// Calibration could not satisfy its targets; carries the best residuals
    /// found so the caller can report how far off the search ended.
    #[error("calibration failed: {reason}; best residuals: {residuals}")]
    CalibrationFailure { reason: String, residuals: String },

    /// Channel/composite fit could not reach its targets.
    #[error("fit failed: {0}")]
    FitFailure(String),

    /// Solid geometry could not be constructed (overlapping units, parts
    /// outside the enclosure, non-positive dimensions).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Malformed input data (WAV, CSV, JSON, config).
    #[error("input error: {0}")]
    Input(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
