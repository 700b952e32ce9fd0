use thiserror::Error;

/// Errors raised by the model, geometry, analysis and flow layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("coordinate x{index} = {value} must be finite and greater than {min:e}")]
    NonPositiveCoordinate { index: usize, value: f64, min: f64 },

    #[error("{name} = {value} is outside the admissible range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("point is not on cone {cone}: |gamma| = {residual:e} exceeds tolerance {tol:e}")]
    NotOnCone { cone: usize, residual: f64, tol: f64 },

    #[error("degenerate parameter a = 1/4: {0}")]
    Degenerate(&'static str),

    #[error("{what} has a pole at {at}")]
    Pole { what: &'static str, at: f64 },

    #[error("eigen-decomposition failed: {0}")]
    Eigen(String),

    #[error("integration failed at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },

    #[error("no bracket found for {0}")]
    NoBracket(&'static str),

    #[error("no boundary crossing found on the mesh")]
    NoCrossing,
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checks `lo < value < hi` (open) and returns a range error otherwise.
pub(crate) fn check_open(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    range: &'static str,
) -> Result<f64> {
    if value.is_finite() && value > lo && value < hi {
        Ok(value)
    } else {
        Err(Error::OutOfRange { name, value, range })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    check_open(name, value, 0.0, f64::INFINITY, "(0, inf)")
}
