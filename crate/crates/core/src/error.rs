use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("extension degree {0} is outside 1..=6")]
    InvalidDegree(u32),

    #[error("modulus {modulus:#b} is not a degree-{k} polynomial")]
    WrongModulusDegree { k: u32, modulus: u32 },

    #[error("modulus {modulus:#b} is reducible over GF(2): divisible by {factor:#b}")]
    ReducibleModulus { modulus: u32, factor: u32 },

    #[error("zero has no multiplicative inverse")]
    ZeroInverse,

    #[error("ambient dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: u32, right: u32 },

    #[error("the zero vector does not define a projective point")]
    ZeroVector,

    #[error("function is not an o-permutation: {0}")]
    NotOPermutation(String),

    #[error("singular matrix")]
    SingularMatrix,

    #[error("brute-force enumeration is limited to q <= 16, got q = {0}")]
    FieldTooLarge(usize),

    #[error("the candidate pool is empty")]
    EmptyPool,

    #[error("{0}")]
    InvariantViolation(String),

    #[error("catalog line {line}: {msg}")]
    CatalogParse { line: usize, msg: String },

    #[error("catalog entry '{name}' rejected: {reason}")]
    InvalidEntry { name: String, reason: String },

    #[error("class count mismatch over GF({q}): expected {expected}, found {found}")]
    ClassCountMismatch { q: usize, expected: usize, found: usize },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
