use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("circulant embedding has eigenvalue {value:e} at index {index} (n = {n})")]
    NegativeEigenvalue { n: usize, index: usize, value: f64 },

    #[error("covariance matrix is not numerically positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("{method} generator limited to n <= {limit}, got n = {n}")]
    GridTooLarge {
        method: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("non-finite value {value} at step {step} (epsilon = {epsilon:e})")]
    NonFinite {
        step: usize,
        value: f64,
        epsilon: f64,
    },

    #[error("comparison hypothesis violated at step {step}: {detail}")]
    Hypothesis { step: usize, detail: String },

    #[error("no admissible horizon down to 2^-{max_exponent}")]
    Infeasible { max_exponent: u32 },

    #[error("Picard iterate {iteration} left the band [{lower}, {upper}] at node {node} (value {value})")]
    BandEscape {
        iteration: usize,
        node: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("Picard iteration did not reach {tolerance:e} within {budget} iterations (last distance {last:e})")]
    NoConvergence {
        budget: usize,
        tolerance: f64,
        last: f64,
    },

    #[error("window too short: {0}")]
    WindowTooShort(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid archive: {0}")]
    Archive(String),

    #[error("path {path_index}: {stage} failed: {source}")]
    Artifact {
        path_index: u64,
        stage: &'static str,
        source: std::io::Error,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
