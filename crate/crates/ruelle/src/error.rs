use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error(
        "iteration limit reached after {iterations} steps \
         (residual_h = {residual_h:.3e}, residual_nu = {residual_nu:.3e})"
    )]
    IterationLimit {
        iterations: usize,
        residual_h: f64,
        residual_nu: f64,
    },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("normalization failure: certificate {certificate:.3e} exceeds {limit:.3e}")]
    NormalizationFailure { certificate: f64, limit: f64 },

    #[error("contour passes within {distance:.3e} of an eigenvalue")]
    ContourCollision { distance: f64 },

    #[error("degenerate pairing: |<w, pi v>| = {magnitude:.3e}")]
    DegeneratePairing { magnitude: f64 },

    #[error("precision failure: {0}")]
    PrecisionFailure(String),

    #[error("inequality violated at witness `{witness}`: lhs = {lhs:.17e}, rhs = {rhs:.17e}")]
    InequalityViolation { witness: String, lhs: f64, rhs: f64 },

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
