use thiserror::Error;

use crate::config::ConfigError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index out of bounds: [{i}:{j}] on sequence of length {len}")]
    IndexOutOfBounds { i: usize, j: usize, len: usize },

    #[error("component arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: String, found: String },

    #[error("sequence length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty sequence")]
    EmptySequence,

    #[error("warping band {band} cannot connect sequences of length {left} and {right}")]
    BandInfeasible { band: usize, left: usize, right: usize },

    #[error("operation requires an unbounded band to be finite")]
    UnboundedBand,

    #[error("operation requires scalar components")]
    NonScalar,

    #[error("coefficient count {k} out of range 1..={len}")]
    CoefficientRange { k: usize, len: usize },

    #[error("length {len} is not divisible into {segments} segments")]
    NotDivisible { len: usize, segments: usize },

    #[error("sequence {id:?} has length {len}, shorter than window width {width}")]
    SequenceTooShort { id: String, len: usize, width: usize },

    #[error("query of length {len} is shorter than the minimum {min}")]
    QueryTooShort { len: usize, min: usize },

    #[error("vector dimensionality mismatch: index holds {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sequence id must not be empty")]
    EmptyId,

    #[error("unknown sequence id {0:?}")]
    UnknownId(String),

    #[error("dataset line {line}: {msg}")]
    Dataset { line: usize, msg: String },

    #[error("malformed {what}: {msg}")]
    Format { what: &'static str, msg: String },

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad input data or configuration rather than
    /// by a failure while running a well-formed request.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Dataset { .. } | Error::Format { .. } | Error::Io(_)
        )
    }
}
