use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("function undefined at eigenvalue {eigenvalue:e}")]
    Domain { eigenvalue: f64 },

    #[error("matrix is not positive semi-definite: eigenvalue {eigenvalue:e} below -{threshold:e}")]
    NotPsd { eigenvalue: f64, threshold: f64 },

    #[error("term {index}: {source}")]
    Term {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("term {index} is not strictly positive: smallest eigenvalue {eigenvalue:e} <= {floor:e}")]
    NotStrictlyPositive {
        index: usize,
        eigenvalue: f64,
        floor: f64,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("malformed matrix: {0}")]
    Shape(String),

    #[error("rank {rank} out of range 1..={dim}")]
    RankOutOfRange { rank: usize, dim: usize },

    #[error("parameter out of range: {0}")]
    ParameterRange(String),

    #[error("tail integral diverges for p = {p} with weight dx (requires p > 1)")]
    DivergentTail { p: f64 },

    #[error("Tr M_p increased from {prev:e} to {next:e} at p = {p}; power-mean traces must be non-increasing")]
    NumericalIntegrity { p: f64, prev: f64, next: f64 },

    #[error("unknown checker `{0}`")]
    UnknownChecker(String),

    #[error("invalid input: {0}")]
    Input(String),
}

impl Error {
    pub(crate) fn at_term(self, index: usize) -> Self {
        Error::Term {
            index,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
