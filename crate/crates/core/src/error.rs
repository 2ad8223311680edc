use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("letters must be positive integers, found 0 at position {position}")]
    ZeroLetter { position: usize },

    #[error("not a Cayley permutation: value {missing} is absent but the maximum is {max}")]
    MissingValue { missing: u32, max: u32 },

    #[error("cannot parse permutation from {input:?}: {reason}")]
    Parse { input: String, reason: String },

    #[error("pattern {pattern} is too short: length {len}, need at least {min}")]
    PatternTooShort { pattern: String, len: usize, min: usize },

    #[error("forbidden pattern set must not be empty")]
    NoForbiddenPatterns,

    #[error("input must be nonempty")]
    EmptyInput,

    #[error("length {requested} exceeds the configured resource bound {bound}")]
    ResourceBound { requested: usize, bound: usize },

    #[error("mesh cell {cell} out of range for a pattern of length {len} and maximum {max}")]
    MeshCell { cell: String, len: usize, max: u32 },

    #[error("invalid Dyck path: {0}")]
    InvalidPath(String),

    #[error("unknown machine descriptor {0:?}")]
    UnknownMachine(String),

    #[error("pattern {sigma} does not satisfy the non-class precondition: {reason}")]
    WitnessPrecondition { sigma: String, reason: String },

    #[error("no valid non-class witness found for {sigma}; this is a bug")]
    WitnessNotFound { sigma: String },
}

pub type Result<T> = std::result::Result<T, Error>;
