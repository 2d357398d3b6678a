use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{value} is not a unit modulo {modulus}")]
    NonUnit { value: i64, modulus: u64 },

    #[error("moduli {0} and {1} are not coprime")]
    NotCoprime(u64, u64),

    #[error("modulus must be at least 2, got {0}")]
    InvalidModulus(u64),

    #[error("{0} is not a prime power")]
    NotPrimePower(u64),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("modulus {q} exceeds the counting guard (max {limit}); raise KLOO_MAX_Q to allow it")]
    GuardExceeded { q: u64, limit: u64 },

    #[error("enumeration of {work} tuples exceeds the brute-force guard of {limit}")]
    BruteForceGuard { work: u128, limit: u128 },

    #[error("rounding residual did not drop below 1/4 at {bits} bits")]
    PrecisionExhausted { bits: u32 },

    #[error("|K({a})| exceeds 2*sqrt({p}) beyond the error bound")]
    WeilViolation { p: u64, a: u64 },

    #[error("{0} is represented by both 3u^2+5v^2 and x^2+15y^2")]
    InconsistentRepresentation(u64),

    #[error("fitted form disagrees with the counts at r = {r}")]
    CertificationFailed { r: u32 },

    #[error("high-precision evaluation failed: {0}")]
    Float(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
