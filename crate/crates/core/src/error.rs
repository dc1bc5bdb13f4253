use thiserror::Error;

/// Failures reported by the solver, kernels and checks.
///
/// Scalars are carried as `f64` so the error type does not depend on the
/// scalar parameter of the routine that produced it.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point {point:?} lies outside the closed domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("kernel evaluated at coincident points")]
    Singular,

    #[error("accuracy target missed: {0}")]
    Accuracy(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        trace: Vec<f64>,
    },

    #[error(
        "iterate {iteration} left the invariant bracket: range [{min:e}, {max:e}] vs [{lower:e}, {upper:e}]"
    )]
    BracketViolation {
        iteration: usize,
        min: f64,
        max: f64,
        lower: f64,
        upper: f64,
    },

    #[error("truncation active at the fixed point: min v = {min_v:e} < epsilon = {epsilon:e}")]
    TruncationActive { min_v: f64, epsilon: f64 },

    #[error("dense mode needs {unknowns} unknowns, budget is {limit}; rerun in subsample mode")]
    MemoryBudget { unknowns: usize, limit: usize },

    #[error("eigenvector iterate changed sign at node {node}")]
    SignIndefinite { node: usize },

    #[error("kernel positivity violated: {0}")]
    Positivity(String),

    #[error("boundary rate violated: {0}")]
    RateViolation(String),

    #[error("lower bound u >= m a violated: {0}")]
    LowerBound(String),
}

pub type Result<T> = std::result::Result<T, Error>;
