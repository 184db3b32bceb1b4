use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid spin {0}: must be a non-negative half-integer")]
    InvalidSpin(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Hilbert-space dimension {dim} exceeds the size cap {cap}")]
    SizeCapExceeded { dim: usize, cap: usize },

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not diagonal (max off-diagonal {0:e})")]
    NotDiagonal(f64),

    #[error("assembly routes disagree: max entrywise deviation {deviation:e} (tolerance {tolerance:e})")]
    RouteMismatch { deviation: f64, tolerance: f64 },

    #[error("eigen-residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("numerical regime error: {0}")]
    Regime(String),
}

impl Error {
    /// True for errors describing an unsuitable numerical regime rather than bad input.
    pub fn is_regime(&self) -> bool {
        matches!(self, Error::Regime(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
