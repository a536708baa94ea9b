use thiserror::Error;

/// Errors raised by the numerical kernels and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("f(p) is not finite at p = {point}")]
    Evaluation { point: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: estimate {estimate}, error bound {error_bound}")]
    Accuracy { estimate: f64, error_bound: f64 },

    #[error("operation requires a finite momentum cut-off")]
    UnboundedDomain,

    #[error("inverse iteration did not converge after {iterations} iterations")]
    Solver { iterations: usize },

    #[error("variances diverge for gamma = {gamma} (need gamma > 1/2)")]
    Divergence { gamma: f64 },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("at lambda = {lambda}: {source}")]
    AtLambda {
        lambda: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
