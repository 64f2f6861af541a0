use thiserror::Error;

/// Errors produced by the solver and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("point is not on the unit-modulus set (worst pair deviation {deviation:e}, tol {tol:e})")]
    NotOnManifold { deviation: f64, tol: f64 },

    #[error("iteration limit reached in {0}")]
    IterationLimit(&'static str),

    #[error("eta * gamma_{index} = 1 within {tol:e}; scaling matrix is singular")]
    SingularScaling { index: usize, tol: f64 },

    #[error("point is not stationary: residual {residual:e} exceeds threshold {threshold:e}")]
    NotStationary { residual: f64, threshold: f64 },

    #[error("condition {0} does not hold")]
    ConditionFailed(&'static str),

    #[error("initial error {norm_delta0:e} is outside the linear-rate region (needs < {c1:e})")]
    OutsideRegion { norm_delta0: f64, c1: f64 },

    #[error("step size {eta:e} outside the admissible range (0, {limit:e})")]
    StepOutOfRange { eta: f64, limit: f64 },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("instance generation exhausted {retries} retries without a positive definite reduced Hessian")]
    RetriesExhausted { retries: u32 },

    #[error("stationary point enumeration found {found} roots, expected {expected}")]
    RootCount { found: usize, expected: usize },

    #[error("degenerate stationary point at angle {angle}: |h| = {h_abs:e} below classification threshold")]
    DegenerateStationaryPoint { angle: f64, h_abs: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
