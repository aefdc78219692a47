//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HardyError {
    /// Geometric constructor preconditions (point outside the closed disk, empty arc, ...).
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// Evaluation requested on the weight's singular set.
    #[error("weight is singular at the requested point")]
    Singular,

    /// The weight (or its dual) fails the integrability condition.
    #[error("weight not integrable: {0}")]
    NotIntegrable(String),

    /// Kernel evaluation within 1e-14 of the boundary singularity.
    #[error("kernel argument within 1e-14 of the singularity")]
    NearSingular,

    /// Configuration rejected before any computation ran.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A grid-sampled object was combined with a grid of a different signature.
    #[error("grid signature mismatch: {0}")]
    GridMismatch(String),

    /// Iterative norm estimation hit its iteration cap; `last` is still a lower bound.
    #[error("no convergence after {iterations} iterations (last estimate {last:.6e})")]
    NoConvergence { iterations: usize, last: f64 },

    /// Text input (weight strings, CSV, config files) rejected; `position` is a byte offset.
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HardyError>;
