use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("basis cutoff too small: truncated tail weight {tail:.3e} exceeds {limit:.1e}")]
    CutoffTooSmall { tail: f64, limit: f64 },

    #[error("state is not positive: eigenvalue {eigenvalue:.3e} below tolerance")]
    NotPositive { eigenvalue: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("step size underflow at t = {time}")]
    StepSizeUnderflow { time: f64 },

    #[error("stationary kernel has dimension {multiplicity}, expected 1")]
    KernelMultiplicity { multiplicity: usize },

    #[error("iteration did not converge: residual {residual:.3e}")]
    NotConverged { residual: f64 },

    #[error("quadrature normalization off by {deviation:.3e}; refine the grid")]
    GridTooCoarse { deviation: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
