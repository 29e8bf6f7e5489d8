use thiserror::Error;

/// Errors surfaced by the numerics core.
///
/// Every refusal carries enough context to be actionable from a config file:
/// which precondition failed and the measured value that failed it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("field shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("potentials differ on the collar: max |A1-A2| = {max_diff:e} at node ({ix},{iy})")]
    CollarViolation { max_diff: f64, ix: usize, iy: usize },

    #[error("preset support reaches the collar: {0}")]
    SupportTouchesCollar(String),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error(
        "spectral shift {lambda_re}+{lambda_im}i is too close to the discrete spectrum \
         (guard distance {guard:e}): {detail}"
    )]
    NearSpectrum {
        lambda_re: f64,
        lambda_im: f64,
        guard: f64,
        detail: String,
    },

    #[error("linear solve residual {residual:e} exceeds the contract {contract:e}")]
    SolveContract { residual: f64, contract: f64 },

    #[error("eigensolver failed: {0}")]
    EigenFailure(String),

    #[error("banded factorization hit a zero pivot at column {col}")]
    SingularFactor { col: usize },

    #[error("frame is invalid: {0}")]
    InvalidFrame(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("mollification rejected: {0}")]
    Mollify(String),
}

pub type Result<T> = std::result::Result<T, Error>;
