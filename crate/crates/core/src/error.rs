use thiserror::Error;

use crate::model::Enclosure;

/// Errors produced by the solver toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A problem or sequence description violates a structural invariant.
    #[error("invalid problem: {0}")]
    Invalid(String),

    /// An index outside the domain of a sequence or window was requested.
    #[error("index {index} out of range: {reason}")]
    Index { index: i64, reason: String },

    /// A series provably diverges.
    #[error("non-summable or unknown tail: {0}")]
    Divergent(String),

    /// The enclosure did not reach the requested width within the term budget.
    #[error("tolerance {tol:e} not met within {terms} terms (best width {width:e})", width = best.width())]
    ToleranceNotMet {
        tol: f64,
        terms: u64,
        best: Enclosure,
    },

    /// No analytic majorant is known, so neither convergence nor divergence
    /// can be certified.
    #[error("non-summable or unknown tail: {0}")]
    UnknownTail(String),

    /// A precondition of an operation is not satisfied.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A scan for `n0` or `k0` ran past its limit.
    #[error("scan exhausted at {limit} ({detail})")]
    ScanExhausted { limit: i64, detail: String },

    /// The contraction constant could not be certified below one.
    #[error("not certifiably contractive (kappa = {kappa}) - enlarge n0")]
    NotContractive { kappa: f64 },

    /// Picard iteration hit `max_iter` before the fixed-point tolerance.
    #[error("no convergence after {iterations} iterations (last step {last_step:e})")]
    MaxIterations { iterations: usize, last_step: f64 },

    /// An iterate left the invariant ball.
    #[error("iterate left the ball: {0}")]
    BallViolation(String),

    /// The accepted window does not satisfy the equation to the requested tolerance.
    #[error("residual {residual:e} exceeds tolerance {tol:e}")]
    Residual { residual: f64, tol: f64 },

    /// Operation not supported for this configuration.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
