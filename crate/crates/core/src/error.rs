use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum NgcError {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("layer width {width} is not divisible by group size {group}")]
    GroupSize { width: usize, group: usize },

    #[error("gradient oracle requires differentiable activations, got {0}")]
    NonDifferentiable(&'static str),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("bad IDX magic 0x{0:08x}")]
    IdxMagic(u32),

    #[error("IDX payload truncated: expected {expected} bytes, found {found}")]
    IdxTruncated { expected: usize, found: usize },

    #[error("IDX dimensions overflow addressable size")]
    IdxDimOverflow,

    #[error("invalid data: {0}")]
    Data(String),

    #[error("prior not fitted: {0} has no gmm.manifest.json")]
    PriorNotFitted(PathBuf),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("labels missing for {0}")]
    LabelsMissing(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl NgcError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        NgcError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, NgcError>;
