use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("size {n} outside the supported range {min}..={max}")]
    SizeOutOfRange { n: usize, min: usize, max: usize },

    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("partition {0} is crossing")]
    Crossing(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not an orthogonal projection (residual {residual:.3e})")]
    NotProjection { residual: f64 },

    #[error("not a permutation: {0:?}")]
    InvalidPermutation(Vec<usize>),

    #[error("index {index} out of range 0..{bound}")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("rank {rank} out of range 0..={dim}")]
    RankOutOfRange { rank: usize, dim: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("element is not in the amalgamation algebra (residual {residual:.3e})")]
    NotInSubalgebra { residual: f64 },

    #[error("conditional expectation incompatible with the state (residual {residual:.3e})")]
    IncompatibleState { residual: f64 },

    #[error("arity {arity} exceeds the supported maximum {max}")]
    ArityOverflow { arity: usize, max: usize },

    #[error("word of length {len} exceeds the evaluation limit {max}")]
    WordTooLong { len: usize, max: usize },

    #[error("amalgamation algebra is not commutative")]
    NonCommutativeSubalgebra,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),
}
