use thiserror::Error;

/// Errors raised by the symbolic calculus, the quadrature oracle and the
/// constant evaluators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("fiber rank mismatch: {left} vs {right}")]
    FiberRankMismatch { left: usize, right: usize },
    #[error("degree {degree} exceeds the configured cap {cap}")]
    DegreeOverflow { degree: u32, cap: u32 },
    #[error("index {index} out of range 1..={bound}")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("variable domain violation: {0}")]
    VariableDomain(String),
    #[error("unsupported composition pair ({left}, {right})")]
    UnsupportedPair { left: String, right: String },
    #[error("quadrature needs {required} nodes on an axis but the grid has {available}")]
    InsufficientNodes { required: usize, available: usize },
    #[error("quadrature budget exceeded: {0}")]
    QuadratureBudget(String),
    #[error("no convergence after {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("parity mismatch: {0}")]
    ParityMismatch(String),
    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),
    #[error("invalid geometry data: {0}")]
    Geometry(String),
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("format error: {0}")]
    Format(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
