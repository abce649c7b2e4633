//! CholeskyQR and CholeskyQR2.

use crate::error::{Error, Result};
use crate::linalg::{cholesky, gram, trsm_right, upper_matmul, DenseMatrix};

/// `R = chol(MᵀM)`, `Q = M·R⁻¹`. A Cholesky failure is returned unchanged as
/// [`Error::NotPositiveDefinite`].
pub fn cholesky_qr(m: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    if m.rows() < m.cols() {
        return Err(Error::DimensionMismatch(format!(
            "cholesky_qr needs rows >= cols, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let r = cholesky(&gram(m))?;
    let q = trsm_right(m, &r)?;
    Ok((q, r))
}

/// Two CholeskyQR passes; `R = R₂·R₁`.
pub fn cholesky_qr2(m: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let (q1, r1) = cholesky_qr(m)?;
    let (q, r2) = cholesky_qr(&q1)?;
    Ok((q, upper_matmul(&r2, &r1)))
}
