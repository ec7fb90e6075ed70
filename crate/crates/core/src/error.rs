use thiserror::Error;

/// Errors raised by every layer of the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("operands live over different fields ({0} vs {1})")]
    MixedFields(String, String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("input must be nonzero")]
    ZeroInput,
    #[error("invalid modulus {0}: must be an odd prime")]
    InvalidModulus(u64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular")]
    Singular,
    #[error("quadratic form is singular")]
    SingularForm,
    #[error("operation requires a finite prime field")]
    WrongField,
    #[error("matrix is not a member of {0}")]
    MembershipFailure(String),
    #[error("unsupported group: {0}")]
    UnsupportedGroup(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unit data is not a cocycle: {0}")]
    NotACocycle(String),
    #[error("rank mismatch: expected {expected}, got {actual}")]
    RankMismatch { expected: usize, actual: usize },
    #[error("no valid sample points found: {0}")]
    DegenerateCover(String),
    #[error("no invertible intertwiner exists")]
    NoIntertwiner,
    #[error("factorization does not reproduce the conjugator")]
    FactorizationMissing,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
