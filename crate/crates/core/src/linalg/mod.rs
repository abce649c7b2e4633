//! Dense kernels: storage, Householder QR, triangular solves, Cholesky,
//! Jacobi SVD, norm estimation and Matrix Market IO.

mod householder;
mod matrix;
mod mm;
mod norms;
mod svd;
mod triangular;

pub(crate) use householder::{apply_reflector, make_reflector, Reflectors};
pub use householder::{householder_qr, householder_r};
pub(crate) use matrix::{dot, norm2};
pub use matrix::{DenseMatrix, TriangularPartition};
pub use mm::{
    read_matrix_market, read_matrix_market_file, write_matrix_market, write_matrix_market_file,
    MmFormat,
};
pub(crate) use norms::{inverse_norm_upper, power_iteration};
pub use norms::{cond_2, spectral_norm, NormEstimate, POWER_MAX_ITERS, POWER_TOL};
pub use svd::{svd, svd_values, Svd};
pub(crate) use triangular::cholesky_partial;
pub use triangular::{cholesky, gram, solve_upper, trsm_right, upper_matmul};

use crate::error::Result;

/// Unit roundoff of IEEE double precision, `2⁻⁵³`.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// `‖QᵀQ − I‖₂`, computed exactly through the singular values of the
/// (small) symmetric error matrix.
pub fn orthogonality_loss(q: &DenseMatrix) -> Result<f64> {
    let mut e = q.tr_matmul(q);
    for i in 0..e.rows() {
        e[(i, i)] -= 1.0;
    }
    Ok(svd_values(&e)?.first().copied().unwrap_or(0.0))
}
