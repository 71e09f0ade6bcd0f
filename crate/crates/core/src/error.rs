use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// The variants are coarse on purpose: callers (the CLI in particular) map
/// them onto exit codes, so each one corresponds to a class of failure
/// rather than to a single call site.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("regime error: {0}")]
    Regime(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("size limit exceeded: {0}")]
    Size(String),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("accuracy target missed: {0}")]
    Accuracy(String),

    #[error("saddle at infinity: k={k} is a boundary point for n={n}")]
    Boundary { n: usize, k: usize },

    #[error("no probability mass on one side of k={k}")]
    NoMass { k: usize },

    #[error("degenerate model: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
