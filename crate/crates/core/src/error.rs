use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("event time {0} is already present")]
    DuplicateTime(f64),
    #[error("event index {index} out of range for {len} events")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("sites must be distinct, got {0} twice")]
    SameSite(usize),
    #[error("matrix dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("Hilbert space dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("enumeration size {size} exceeds cap {cap}")]
    EnumerationCap { size: u128, cap: u128 },
    #[error("operator is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("operator has a non-negligible imaginary part ({0:e})")]
    NotReal(f64),
    #[error("loop weight is not strictly positive")]
    NonPositiveWeight,
    #[error("total sample weight vanished")]
    ZeroTotalWeight,
    #[error("half-integer spin 2S={0} is not supported here")]
    HalfIntegerSpin(u32),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
