use thiserror::Error;

/// Errors raised by the fitting and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum IplError {
    #[error("dimension mismatch: expected {expected}, got {found} ({context})")]
    DimensionMismatch {
        expected: usize,
        found: usize,
        context: &'static str,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("not enough rows: {context} needs at least {required}, have {available}")]
    TooFewRows {
        required: usize,
        available: usize,
        context: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degree {0} is not supported (1..=20)")]
    UnsupportedDegree(u32),

    #[error("factorization failed: {0}")]
    Factorization(&'static str),

    #[error("solver diverged at iteration {iteration}: residual {residual:e}")]
    Diverged { iteration: usize, residual: f64 },

    #[error("invalid label {value} at position {index}: expected -1 or 1")]
    InvalidLabel { index: usize, value: f64 },

    #[error("{0}")]
    Empty(&'static str),

    #[error("parse error: {0}")]
    Parse(String),
}

impl IplError {
    /// True for failures that originate in numerics rather than in the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            IplError::Factorization(_) | IplError::Diverged { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, IplError>;

pub(crate) fn ensure_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(IplError::NonFinite(what))
    }
}
