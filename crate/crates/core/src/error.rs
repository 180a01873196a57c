use thiserror::Error;

/// Errors raised anywhere in the numerics pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("admissibility violation: {0}")]
    Admissibility(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("potential depth {depth} is too large for a depth-{k} transfer matrix (needs depth <= {})", k + 1)]
    Depth { depth: usize, k: usize },

    #[error("power iteration did not converge after {iterations} steps (last residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("series diverges: {0}")]
    Divergence(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("abscissa mismatch: (s-1)*zeta(s) blows up along the grid ({0})")]
    AbscissaMismatch(String),

    #[error("Gurevich pressure undefined: no admissible loop at symbol {symbol} within {n_max} steps")]
    UndefinedPressure { symbol: usize, n_max: usize },

    #[error("not a g-function: normalization defect {defect:e} exceeds {threshold:e}")]
    NotNormalized { defect: f64, threshold: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
