use thiserror::Error;

/// Errors produced by the set-algebra engine.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("value {value} does not fit in {bits} bits")]
    ValueOutOfRange { value: u64, bits: u32 },
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),
    #[error("input is not sorted and distinct at position {0}")]
    NotSortedDistinct(usize),
    #[error("sets were built with different hash seeds or parameters: {0}")]
    SeedMismatch(String),
    #[error("unknown set `{0}`")]
    UnknownSet(String),
    #[error(transparent)]
    Parse(#[from] crate::expr::ParseError),
    #[error("malformed index data: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn bad(msg: impl Into<String>) -> Error {
    Error::BadParameter(msg.into())
}
