use thiserror::Error;

/// Errors produced by the regime model, corpus loader and estimator.
#[derive(Debug, Error)]
pub enum RegimeError {
    /// A scalar input was NaN or infinite.
    #[error("domain error: {0}")]
    Domain(String),
    /// A model or configuration parameter violates its constraints.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// Finite differences requested across the |G| kink.
    #[error("gap {gap} lies within step {step} of the non-differentiable point 0")]
    Kink { gap: f64, step: f64 },
    #[error("malformed corpus JSON: {0}")]
    Parse(String),
    #[error("schema error at turn {turn}: {message}")]
    Schema { turn: i64, message: String },
    #[error("order error: {0}")]
    Order(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("numeric failure{}: {message}", turn.map(|t| format!(" at position {t}")).unwrap_or_default())]
    Numeric { turn: Option<usize>, message: String },
    #[error("calibration unavailable: corpus has no MN-labeled turns; pass lambda explicitly")]
    CalibrationUnavailable,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = RegimeError> = std::result::Result<T, E>;

pub(crate) fn ensure_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(RegimeError::Domain(format!("{name} must be finite, got {x}")))
    }
}
