use thiserror::Error;

/// Errors raised by the field, matrix and factorization routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not a prime in [2, 2^26)")]
    InvalidModulus(u64),
    #[error("accumulator of {acc_bits} bits cannot hold a single product modulo {p}")]
    Capacity { p: u64, acc_bits: u32 },
    #[error("accumulator width {0} is outside the supported range [2, 62]")]
    InvalidAccBits(u32),
    #[error("division by zero")]
    ZeroDivision,
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("empty matrix")]
    EmptyMatrix,
    #[error("invalid block size {k} for dimension {n}")]
    InvalidBlock { n: usize, k: usize },
    #[error("invalid dimension {0}: recursive count formulas need a power of two")]
    InvalidDim(usize),
    #[error("zero diagonal entry at index {0} in a non-unit triangular solve")]
    SingularDiagonal(usize),
    #[error("zero pivot at step {0}: input lacks a generic rank profile")]
    ZeroPivot(usize),
    #[error("factorization does not carry order-preserving permutations")]
    NotRankRevealing,
    #[error("requested rank {rank} exceeds min({rows}, {cols})")]
    InvalidRank { rank: usize, rows: usize, cols: usize },
    #[error("malformed matrix file: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
