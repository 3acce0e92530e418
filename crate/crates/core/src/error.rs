use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),

    #[error("precision mismatch: {0} vs {1} digits")]
    PrecisionMismatch(usize, usize),

    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(u32, u32),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("digit {digit} out of range for base {p}")]
    DigitOutOfRange { digit: u64, p: u64 },

    #[error("not a unit: leading digit is zero")]
    NotAUnit,

    #[error("zero has no valuation/unit decomposition")]
    ZeroDecomposition,

    #[error("level {level} exceeds stored precision {precision}")]
    InsufficientPrecision { level: u32, precision: usize },

    #[error("negative power {0}: normalize the automorphism first")]
    MustNormalize(i64),

    #[error("subgroup index {m} exceeds level {level}")]
    SubgroupIndexOutOfRange { m: u32, level: u32 },

    #[error("group order p^{level} exceeds the size cap")]
    LevelTooLarge { p: u64, level: u32 },

    #[error("enumeration budget exceeded: {candidates} grid distributions per side, budget {budget}")]
    BudgetExceeded { candidates: u128, budget: u128 },

    #[error("table entry at {index} is {value}; logarithm needs strictly positive values")]
    NonpositiveTableEntry { index: usize, value: f64 },

    #[error("case mismatch: {0}")]
    CaseMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot parse rational {0:?}")]
    RationalParse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
