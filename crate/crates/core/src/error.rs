use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid subsystem index {index} for {count} subsystems")]
    InvalidSubsystem { index: usize, count: usize },

    #[error("duplicate subsystem index {0}")]
    DuplicateSubsystem(usize),

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("operator is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("operator is not a projector (max deviation {0:e})")]
    NotProjector(f64),

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("density operator is invalid: {0}")]
    InvalidDensity(String),

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("distribution for setting (x={x}, y={y}) sums to {sum}")]
    UnnormalizedDistribution { x: usize, y: usize, sum: f64 },

    #[error("setting block {0} recorded no events")]
    EmptyConfiguration(String),

    #[error("inconsistent plate configuration: {0}")]
    InconsistentPlates(String),

    #[error("fit did not converge: {0}")]
    NonConvergence(String),

    #[error("rank-deficient covariance: {0}")]
    RankDeficient(String),

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("invalid scan data: {0}")]
    InvalidScan(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("usage: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    range: &'static str,
) -> Result<f64> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(value)
    } else {
        Err(Error::OutOfRange { name, value, range })
    }
}
