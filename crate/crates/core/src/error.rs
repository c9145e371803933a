//! Crate-wide error type.
//!
//! Variants map onto the process exit codes used by the CLI: configuration
//! and contract problems exit with 2, data problems with 3 and solver
//! failures with 4.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration: unknown world names, bad operator parameters,
    /// inconsistent grids, malformed config files.
    #[error("configuration error: {0}")]
    Config(String),

    /// A caller violated an operation contract (out-of-domain pose,
    /// dimension mismatch, non-finite Q-values).
    #[error("contract violation: {0}")]
    Contract(String),

    /// World geometry is unusable, e.g. rejection sampling cannot find free
    /// space.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Input data is unusable: non-finite features or rewards, truncated or
    /// malformed batch/weight files.
    #[error("data error: {0}")]
    Data(String),

    /// A linear solve failed even with regularization.
    #[error("solver error: {msg} (condition estimate {cond_estimate:.3e})")]
    Solver { msg: String, cond_estimate: f64 },

    /// I/O failure, annotated with the path that was being accessed.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Exit code the CLI should use for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Contract(_) | Error::Geometry(_) => 2,
            Error::Data(_) | Error::Io { .. } => 3,
            Error::Solver { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
