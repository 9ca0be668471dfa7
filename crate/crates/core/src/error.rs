use thiserror::Error;

/// Errors raised by the library. Every operation that can reject its input
/// returns one of these; nothing panics on user-supplied data.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("argument must be nonzero: {0}")]
    Zero(&'static str),
    #[error("precision {precision} is below the minimum {minimum} for p = {p}")]
    PrecisionTooLow { p: u64, precision: u32, minimum: u32 },
    #[error("precision {0} leaves no room in a 64-bit residue")]
    PrecisionTooHigh(u32),
    #[error("{0} is not a square in Q_{1}")]
    NotASquare(String, u64),
    #[error("{0} is a square in Q")]
    RationalSquare(String),
    #[error("integer {0} is too large to factor by trial division")]
    FactorizationTooLarge(String),
    #[error("structure constant a = {0} is not a 2-adic square; only the diagonal splitting is supported")]
    UnsupportedSplitting(String),
    #[error("real embedding needs a > 0, got {0}")]
    NotRealSplit(String),
    #[error("structure constants must be integers, got ({0}, {1})")]
    NonIntegralAlgebra(String, String),
    #[error("order {0} is not available for this algebra")]
    OrderUnavailable(&'static str),
    #[error("splitting precision {available} is insufficient, need {needed}")]
    InsufficientPrecision { available: i64, needed: i64 },
    #[error("element is not 2-adically integral under the splitting")]
    NotIntegral,
    #[error("group of order {order} exceeds the cap {cap}")]
    CapExceeded { order: u128, cap: u128 },
    #[error("generators use different moduli")]
    MixedModuli,
    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(u64, u64),
    #[error("subgroup is not contained in the ambient group")]
    NotASubgroup,
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("determinant is not 1 (got {0})")]
    DeterminantNotOne(String),
    #[error("denominator prime {0} is not among the supported primes")]
    UnsupportedPrime(u64),
    #[error("algebra is not a division algebra; the torsion criterion does not apply")]
    NotDivision,
    #[error("{0}")]
    InvalidInput(String),
    #[error("no suitable b with |b| <= {0}")]
    NoExampleAlgebra(u64),
    #[error("map is not an involution")]
    NotAnInvolution,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("certificate re-verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
