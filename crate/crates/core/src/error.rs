use std::io;

use thiserror::Error;

pub type Result<T, E = TllError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum TllError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("symbol `{symbol}` is not finite at frequency {xi:?}")]
    NonFiniteSymbol { symbol: String, xi: Vec<i64> },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("field is not solenoidal: relative divergence {divergence:e} exceeds {tolerance:e}")]
    NotSolenoidal { divergence: f64, tolerance: f64 },

    #[error("malformed field file: {0}")]
    Format(String),

    #[error("malformed config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl TllError {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        TllError::InvalidParameter(msg.into())
    }

    /// True for errors that originate in the numerics rather than in the
    /// caller's input (the CLI maps these to a distinct exit code).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            TllError::NonFiniteSymbol { .. } | TllError::NonFinite(_) | TllError::NotSolenoidal { .. }
        )
    }
}
