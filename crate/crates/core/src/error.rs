use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A mathematical precondition on the inputs does not hold.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structurally invalid argument (unknown node, bad length, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A construction would exceed a configured size limit.
    #[error("resource limit exceeded: {what} needs {needed}, limit is {limit}")]
    Resource {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    /// An iterative solver failed to converge.
    #[error("{solver} did not converge after {iterations} iterations (bracket [{lo}, {hi}], residual {residual:e})")]
    Numeric {
        solver: &'static str,
        iterations: usize,
        lo: f64,
        hi: f64,
        residual: f64,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
