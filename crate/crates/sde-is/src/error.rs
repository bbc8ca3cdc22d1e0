//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("drift or likelihood produced a non-finite value at state {state:?}")]
    NonFiniteModelOutput { state: Vec<f64> },

    #[error("non-finite value encountered while evaluating the path cost")]
    NonFiniteCost,

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParam { key: String, reason: String },

    #[error("matrix not positive definite at block {block}")]
    NotPositiveDefinite { block: usize },

    #[error("Newton iteration exceeded {max_iters} iterations (best cost {best_cost}, grad norm {grad_norm})")]
    MaxItersExceeded {
        max_iters: usize,
        best: Vec<f64>,
        best_cost: f64,
        grad_norm: f64,
    },

    #[error("sample failed: {0}")]
    SampleFailed(String),

    #[error("{failed} of {total} samples failed (more than 1%)")]
    TooManyFailures { failed: usize, total: usize },

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("step index {step} outside [1, {n_steps}]")]
    OutOfRangeStep { step: usize, n_steps: usize },

    #[error("non-positive value in log-log fit")]
    NonPositiveValue,

    #[error("model not supported: {0}")]
    ModelNotSupported(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
