use thiserror::Error;

/// Errors raised by the numerical and filtering routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A coordinate lies so far outside the image that a single mirror
    /// reflection does not bring it back inside.
    #[error("index {index} cannot be mirrored into an axis of length {len}")]
    InvalidWindow { index: isize, len: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("dimension mismatch: {expected_width}x{expected_height} vs {width}x{height}")]
    DimensionMismatch {
        expected_width: usize,
        expected_height: usize,
        width: usize,
        height: usize,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
