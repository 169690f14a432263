use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Shapes or tensor factorizations do not fit together.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// Malformed input values (non-finite entries, out-of-range indices).
    #[error("input error: {0}")]
    Input(String),
    /// A structural invariant (unitarity, projector, normalization) failed.
    #[error("validation error: {0}")]
    Validation(String),
    /// The request exceeds the configured memory/dimension guard.
    #[error("resource error: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! dim_err {
    ($($arg:tt)*) => { $crate::error::Error::Dimension(format!($($arg)*)) };
}
pub(crate) use dim_err;
