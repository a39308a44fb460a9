use thiserror::Error;

use crate::kinematics::{PhasePattern, ProblemValidation};

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("problem rejected: {0}")]
    Rejected(ProblemValidation),

    #[error("{0} requires a {1} distribution")]
    UnsupportedDistribution(&'static str, &'static str),

    #[error("root not bracketed on [{lo}, {hi}] (f(lo)={f_lo}, f(hi)={f_hi})")]
    NoBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("no sign change of the switch function below {cap}")]
    NoSwitchRoot { cap: f64 },

    #[error("instance lies on a region boundary; nearest pattern {nearest}")]
    BoundaryDegenerate { nearest: PhasePattern },

    #[error("quadrature failed to converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },

    #[error("invalid trajectory: {0}")]
    Trajectory(String),

    #[error("grid needs {needed} bytes, budget is {budget}")]
    MemoryBudget { needed: usize, budget: usize },

    #[error("{0}")]
    Oracle(String),

    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be finite and positive, got {value}") })
    }
}
