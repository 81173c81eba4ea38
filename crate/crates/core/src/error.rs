use std::path::PathBuf;

use thiserror::Error;

use crate::geometry::GeometryError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Input data violates an invariant (overlapping footprints, duplicate ids, ...).
    #[error("validation error: {0}")]
    Validation(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    /// Two engines disagreed on the recognized groups.
    #[error("consistency error: {0}")]
    Consistency(String),
    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Parse { path: PathBuf, msg: String },
}

impl Error {
    /// True for errors caused by bad input rather than by the engine.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Geometry(_)
                | Error::InvalidArgument(_)
                | Error::Validation(_)
                | Error::Schema(_)
                | Error::InvalidPattern(_)
                | Error::Parse { .. }
                | Error::NotFound(_)
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
