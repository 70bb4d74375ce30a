use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("block is singular or indefinite")]
    SingularBlock,

    #[error("dense assembly of size {size} exceeds the limit of {limit}")]
    CapacityExceeded { size: usize, limit: usize },

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("pivot block at vertex {vertex} is not positive definite")]
    NotPositiveDefinite { vertex: usize },

    #[error("matrix is not positive definite")]
    NotPositiveDefiniteMatrix,

    #[error("operator is not positive definite (p'Ap <= 0 at iteration {iteration})")]
    NotPositiveDefiniteOperator { iteration: usize },

    #[error("numerical breakdown (NaN) at iteration {iteration}")]
    NumericalBreakdown { iteration: usize },

    #[error("packing infeasible: placed {placed} of {requested} cells")]
    PackingInfeasible { placed: usize, requested: usize },

    #[error("cells {i} and {j} have coincident centers")]
    DegenerateContact { i: usize, j: usize },

    #[error("off-diagonal block ({i}, {j}) is neither positive nor negative definite")]
    NotDefinite { i: usize, j: usize },

    #[error("row {i} is not block diagonally dominant")]
    NotDominant { i: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit code used by the `bench` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 3,
            Error::Config(_) | Error::Json(_) | Error::Parse { .. } | Error::InvalidInput(_) => 2,
            _ => 1,
        }
    }
}
