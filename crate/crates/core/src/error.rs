use thiserror::Error;

/// Errors shared across all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("point ({x}, {y}) lies outside the region A beyond tolerance {tol:e}{context}")]
    OutsideRegion {
        x: f64,
        y: f64,
        tol: f64,
        context: String,
    },

    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("operators do not commute (defect {defect:e}, tolerance {tol:e})")]
    NotCommuting { defect: f64, tol: f64 },

    #[error("eigensolver did not converge (off-diagonal mass {off:e} after {sweeps} sweeps)")]
    NoConvergence { off: f64, sweeps: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("malformed operator: basis index ({label}, {copy}) covered by more than one rule")]
    DoubleCoverage { label: usize, copy: u64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
