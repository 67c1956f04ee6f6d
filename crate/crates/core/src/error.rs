use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("inversion of zero")]
    DivisionByZero,
    #[error("series has no known nonzero leading coefficient")]
    NotInvertible,
    #[error("argument {0} does not lie in the open unit disk")]
    NotInDisk(String),
    #[error("coefficient at index {index} has negative valuation {valuation}")]
    NonIntegralCoefficient { index: i64, valuation: i64 },
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("{q} is not a power of {p}")]
    NotPowerOfP { q: u64, p: u64 },
    #[error("nonzero coefficient at exponent {exponent} is not divisible by {q}")]
    SupportNotDivisible { exponent: i64, q: u64 },
    #[error("negative exponent {0} where a power series is required")]
    NegativeExponent(i64),
    #[error("exponent {exponent} exceeds the cap {cap}")]
    CapExceeded { exponent: u64, cap: u64 },
    #[error("valuation is undecidable at precision {0}")]
    UndecidableValuation(u32),
    #[error("invalid index range: {0}")]
    InvalidRange(String),
    #[error("not a principal unit: {0}")]
    NotPrincipal(String),
    #[error("requested precision {requested} exceeds the attainable cap {cap}")]
    PrecisionExceedsCap { requested: i64, cap: i64 },
    #[error("exact result is infinite; a target precision is required")]
    PrecisionRequired,
    #[error("{ell} is not coprime to {p}")]
    NotCoprime { ell: u64, p: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("search cap {0} exceeded")]
    SearchCapExceeded(u64),
    #[error("series has nonzero terms below degree 2")]
    LowOrderTerms,
    #[error("group law check failed: {0}")]
    LawCheckFailed(String),
    #[error("certificate verification failed: {0}")]
    Verification(String),
}

impl Error {
    pub(crate) fn precision(msg: impl Into<String>) -> Self {
        Error::InsufficientPrecision(msg.into())
    }

    pub fn is_precision(&self) -> bool {
        matches!(
            self,
            Error::InsufficientPrecision(_)
                | Error::PrecisionExceedsCap { .. }
                | Error::UndecidableValuation(_)
        )
    }
}
