//! Error types shared across the crate.

/// Errors produced by the solver library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated an operation's preconditions.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A point or parameter vector had the wrong length.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// Cholesky factorization hit a non-positive pivot. For RBF
    /// interpolation matrices this is the signature of a width factor
    /// chosen too small for the boundary point spacing.
    #[error("matrix numerically singular at pivot {pivot}; the RBF width factor may be too small for the point spacing")]
    SingularMatrix { pivot: usize },

    /// A point configuration that no construction can proceed from
    /// (coincident points, empty clouds, ...).
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// The objective was not finite at the optimizer's starting point.
    #[error("objective value not finite at the starting point")]
    NonFiniteStart,

    /// Step shrinkage ran out while the objective kept returning
    /// non-finite values.
    #[error("line search exhausted without recovering a finite objective value")]
    NonFiniteObjective,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Malformed serialized data (point-cloud CSV and friends).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
