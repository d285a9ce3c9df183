use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("cannot normalize an all-zero chip vector")]
    ZeroVector,
    #[error("sequence length {0} is below the minimum of 2")]
    TooShort(usize),
    #[error("chip energy {energy} does not match sequence length {n}")]
    NotNormalized { n: usize, energy: f64 },
    #[error("gold code count {0} outside 1..=33")]
    CountOutOfRange(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("user index {index} out of range for {users} users")]
    IndexOutOfRange { index: usize, users: usize },
    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("eigensolver did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("delay {tau} outside [0, {period})")]
    TauOutOfRange { tau: f64, period: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed sequence file: {0}")]
    Format(String),
}
