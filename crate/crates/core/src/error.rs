use thiserror::Error;

/// Errors raised by the geometry, group, and estimator layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid group element: {0}")]
    InvalidElement(String),

    #[error("group {group} does not act on {manifold}")]
    Incompatible { group: String, manifold: String },

    #[error("sample is empty")]
    EmptySample,

    #[error("limit did not stabilize; raw ladder values {raw:?}")]
    NonConvergent { raw: Vec<f64> },

    #[error("iteration budget exhausted; best value found {best}")]
    IterationBudgetExceeded { best: f64 },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
