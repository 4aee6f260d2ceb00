use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero in F")]
    DivisionByZero,

    #[error("matrix is singular")]
    Singular,

    #[error("not a valid prime context: {0}")]
    BadPrime(String),

    #[error("denominator of {0} is not a power of p")]
    BadDenominator(String),

    #[error("rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("pivot valuation precondition violated: need {need}, found {found:?}")]
    PivotValuation { need: i64, found: Option<i64> },

    #[error("parity mismatch: {0}")]
    ParityMismatch(String),

    #[error("enumeration budget exceeded: estimated {estimate} > cap {cap}")]
    BudgetExceeded { estimate: f64, cap: f64 },

    #[error("count did not stabilize at k-cap {k_cap} (best value {best})")]
    Unstabilized { k_cap: u32, best: String },

    #[error("precondition gate violated: {0}")]
    Gate(String),

    #[error("no affordable evaluation path: {0}")]
    NoPath(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
