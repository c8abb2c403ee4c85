use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("p = {0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("p^n = {p}^{n} exceeds 2^31")]
    SizeOverflow { p: u64, n: u64 },
    #[error("context mismatch: F_{0}^{1} vs F_{2}^{3}")]
    ContextMismatch(u32, u32, u32, u32),
    #[error("coordinate vector has length {got}, expected {expected}")]
    BadLength { expected: usize, got: usize },
    #[error("bad magic bytes")]
    BadMagic,
    #[error("truncated bitset: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("header popcount {header} does not match bitset popcount {actual}")]
    PopcountMismatch { header: u64, actual: u64 },
    #[error("nonzero padding bits after index {0}")]
    PaddingBits(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("quadruple precondition fails on triple {triple:?}: {reason}")]
    QuadruplePrecondition { triple: [usize; 3], reason: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{0} too large for exact evaluation")]
    TooLarge(String),
    #[error("stage {stage} failed: {reason}")]
    Stage { stage: &'static str, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
