use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("sets live in different groups ({left:?} vs {right:?})")]
    GroupMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("element index {index} out of range for group of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("{0} must be non-empty")]
    EmptySet(&'static str),

    #[error("invalid arc: {0}")]
    InvalidArc(String),

    #[error("zero character cannot carry a proper arc")]
    ZeroCharacter,

    #[error("frequency vector has {got} components, group has rank {expected}")]
    FrequencyRank { expected: usize, got: usize },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("no character chi' with {m}*chi' = chi: obstruction at modulus {modulus}")]
    NoQuotient { m: u64, modulus: usize },

    #[error("pair is not critical: defect {defect} exceeds tolerance {tolerance}")]
    NotCritical { defect: String, tolerance: String },

    #[error("spectrum is flat: no nonzero frequency carries mass")]
    FlatSpectrum,

    #[error("density has zero mass")]
    ZeroMass,

    #[error("recovery failed at stage `{stage}`: {detail}")]
    Stage { stage: &'static str, detail: String },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Malformed(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
