use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or argument lies outside the domain of the formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// A term, block sum, or bound evaluated to NaN or infinity.
    #[error("non-finite value at index {index}: {value}")]
    NonFinite { index: u64, value: f64 },

    #[error("posterior has no observations yet")]
    NoData,

    #[error("index {index} out of range (limit {limit})")]
    OutOfRange { index: u64, limit: u64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("bound requires the reference block sum for stage {stage}")]
    MissingReference { stage: u64 },

    #[error("Mobius table covers n <= {limit}, but index {needed} was requested")]
    TableTooShort { limit: u64, needed: u64 },

    #[error("bad magic in {path}")]
    BadMagic { path: PathBuf },

    #[error("unsupported format version {found} in {path}")]
    VersionMismatch { path: PathBuf, found: u8 },

    #[error("truncated file {path}: expected {expected} bytes, found {found}")]
    Truncated {
        path: PathBuf,
        expected: u64,
        found: u64,
    },

    #[error("invalid table entry {value} at n = {index}")]
    Corrupt { index: u64, value: i8 },

    /// An alternating sum cancelled beyond what double precision can resolve.
    #[error("precision loss at m = {m}: condition number {condition:e} exceeds {limit:e}")]
    PrecisionLoss { m: u64, condition: f64, limit: f64 },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
