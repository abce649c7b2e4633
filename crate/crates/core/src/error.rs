use thiserror::Error;

/// Errors raised by the factorization, sketching and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A triangular factor used as a preconditioner has an exactly zero diagonal entry.
    #[error("singular triangular factor: zero diagonal entry at index {index}")]
    SingularTriangular { index: usize },

    /// Cholesky factorization hit a leading minor that is not positive definite.
    /// `index` is 1-based, matching the usual `info` return of LAPACK's `potrf`.
    #[error("matrix is not positive definite: leading minor of order {index} failed")]
    NotPositiveDefinite { index: usize },

    #[error("one-sided Jacobi SVD did not converge after {sweeps} sweeps")]
    SvdNoConvergence { sweeps: usize },

    #[error("rank mismatch: rank(M) = {rank_m}, rank(SM) = {rank_sm}")]
    RankMismatch { rank_m: usize, rank_sm: usize },

    #[error("matrix is zero")]
    ZeroMatrix,

    #[error("matrix market: {0}")]
    MatrixMarket(String),

    #[error("malformed sketch blob: {0}")]
    MalformedBlob(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
