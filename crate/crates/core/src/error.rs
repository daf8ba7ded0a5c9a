use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range (extent {extent})")]
    Index { index: usize, extent: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("sinkhorn did not converge after {iterations} iterations (marginal violation {violation:.3e})")]
    Convergence { iterations: usize, violation: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}:{line}: {message}", path.display())]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("alignment failed: {0}")]
    Alignment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
