use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("order N = {n} exceeds the dimension cap {cap}")]
    SizeExceeded { n: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("structural check `{what}` failed: deviation {err:e} exceeds {tol:e}")]
    Structural { what: String, err: f64, tol: f64 },

    #[error("eigenvalue {index} did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence {
        index: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("eigenvalues {index} and {} are not separated (gap {gap:e})", index + 1)]
    NearTie { index: usize, gap: f64 },

    #[error("interlacing bracket {index} for degree {degree} has no sign change")]
    BracketFailure { degree: usize, index: usize },

    #[error("Newton polish for zero {index} of degree {degree} did not converge")]
    NewtonFailure { degree: usize, index: usize },

    #[error("eigenvector {column} cannot be oriented: last component {value:e}")]
    Orientation { column: usize, value: f64 },

    #[error("nodes {index} and {} are too close (spacing {gap:e})", index + 1)]
    NodeSpacing { index: usize, gap: f64 },

    #[error("elementwise solve is singular at diagonal index {index}: numerator {numerator:e} over zero node difference")]
    Singular { index: usize, numerator: f64 },

    #[error("index {k} out of range for order N = {n}")]
    OutOfRange { k: usize, n: usize },

    #[error("truncated tail weight {tail:e} at N = {n} exceeds {limit:e}")]
    TailWeight { tail: f64, n: usize, limit: f64 },

    #[error("expectation of a Hermitian operator has imaginary part {imag:e}")]
    NonRealExpectation { imag: f64 },

    #[error("variance of {which} is negative: {value:e}")]
    NegativeVariance { which: &'static str, value: f64 },

    #[error("resolvent requires a non-real shift, got {re} + {im}i")]
    RealShift { re: f64, im: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("unknown check `{0}`")]
    UnknownCheck(String),

    #[error("malformed fixture `{name}`: {reason}")]
    Fixture { name: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
