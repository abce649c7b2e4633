//! Triangular solves and products, plus the Gram/Cholesky pair used by CholeskyQR.

use super::matrix::{axpy, dot, DenseMatrix, ROW_BLOCK};
use crate::error::{Error, Result};

fn check_square_upper(r: &DenseMatrix, who: &str) -> Result<()> {
    if r.rows() != r.cols() {
        return Err(Error::DimensionMismatch(format!(
            "{who}: triangular factor must be square, got {}x{}",
            r.rows(),
            r.cols()
        )));
    }
    if let Some(i) = (0..r.rows()).find(|&i| r[(i, i)] == 0.0) {
        return Err(Error::SingularTriangular { index: i });
    }
    Ok(())
}

/// Solves `X R = M` for `X` with `R` square upper-triangular.
///
/// Rows of `X` depend only on the same rows of `M`, so the solve runs over
/// blocks of rows that stay in cache. The operation order is fixed, so the
/// result is bitwise reproducible.
pub fn trsm_right(m: &DenseMatrix, r: &DenseMatrix) -> Result<DenseMatrix> {
    check_square_upper(r, "trsm_right")?;
    let k = r.rows();
    if m.cols() != k {
        return Err(Error::DimensionMismatch(format!(
            "trsm_right: M has {} columns, R is {k}x{k}",
            m.cols()
        )));
    }
    let rows = m.rows();
    let mut x = m.clone();
    let mut r0 = 0;
    while r0 < rows {
        let r1 = (r0 + ROW_BLOCK).min(rows);
        for j in 0..k {
            for i in 0..j {
                let rij = r[(i, j)];
                if rij != 0.0 {
                    let (xi, xj) = x.two_cols_mut(i, j);
                    axpy(-rij, &xi[r0..r1], &mut xj[r0..r1]);
                }
            }
            let d = r[(j, j)];
            for v in &mut x.col_mut(j)[r0..r1] {
                *v /= d;
            }
        }
        r0 = r1;
    }
    Ok(x)
}

/// Solves `R X = B` by back substitution.
pub fn solve_upper(r: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    check_square_upper(r, "solve_upper")?;
    let k = r.rows();
    if b.rows() != k {
        return Err(Error::DimensionMismatch(format!(
            "solve_upper: R is {k}x{k}, B has {} rows",
            b.rows()
        )));
    }
    let mut x = b.clone();
    for c in 0..x.cols() {
        let col = x.col_mut(c);
        upper_solve_in_place(r, col);
    }
    Ok(x)
}

/// `x <- R⁻¹ x`. Caller guarantees a nonzero diagonal.
pub(crate) fn upper_solve_in_place(r: &DenseMatrix, x: &mut [f64]) {
    for j in (0..x.len()).rev() {
        x[j] /= r[(j, j)];
        let xj = x[j];
        if xj != 0.0 {
            axpy(-xj, &r.col(j)[..j], &mut x[..j]);
        }
    }
}

/// `x <- R⁻ᵀ x`. Caller guarantees a nonzero diagonal.
pub(crate) fn upper_tr_solve_in_place(r: &DenseMatrix, x: &mut [f64]) {
    for j in 0..x.len() {
        let s = dot(&r.col(j)[..j], &x[..j]);
        x[j] = (x[j] - s) / r[(j, j)];
    }
}

/// Product of an upper-triangular `k x k` matrix with a `k x n` matrix.
pub fn upper_matmul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    assert_eq!(a.cols(), b.rows());
    let (k, n) = (a.rows(), b.cols());
    let mut out = DenseMatrix::zeros(k, n);
    for j in 0..n {
        let bj = b.col(j);
        let oj = out.col_mut(j);
        for (l, &blj) in bj.iter().enumerate() {
            if blj != 0.0 {
                let top = (l + 1).min(k);
                axpy(blj, &a.col(l)[..top], &mut oj[..top]);
            }
        }
    }
    out
}

/// `MᵀM`, symmetrized exactly by mirroring the computed upper triangle.
pub fn gram(m: &DenseMatrix) -> DenseMatrix {
    let (rows, n) = m.shape();
    let mut g = DenseMatrix::zeros(n, n);
    let mut r0 = 0;
    while r0 < rows {
        let r1 = (r0 + ROW_BLOCK).min(rows);
        for j in 0..n {
            let cj = &m.col(j)[r0..r1];
            for i in 0..=j {
                g[(i, j)] += dot(&m.col(i)[r0..r1], cj);
            }
        }
        r0 = r1;
    }
    for j in 0..n {
        for i in 0..j {
            g[(j, i)] = g[(i, j)];
        }
    }
    g
}

/// Upper-triangular Cholesky factor `R` with `RᵀR = G`.
///
/// Reads only the upper triangle of `G`. On failure the error carries the
/// 1-based order of the first leading minor that is not positive definite.
pub fn cholesky(g: &DenseMatrix) -> Result<DenseMatrix> {
    let (r, failed) = cholesky_partial(g)?;
    match failed {
        None => Ok(r),
        Some(index) => Err(Error::NotPositiveDefinite { index }),
    }
}

/// Cholesky that stops at the first failing minor. Returns the factor of the
/// leading block that did succeed (zero-padded to full size) and the 1-based
/// failure index, if any.
pub(crate) fn cholesky_partial(g: &DenseMatrix) -> Result<(DenseMatrix, Option<usize>)> {
    let n = g.rows();
    if g.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "cholesky: matrix must be square, got {}x{}",
            g.rows(),
            g.cols()
        )));
    }
    let mut r = DenseMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            let s = g[(i, j)] - dot(&r.col(i)[..i], &r.col(j)[..i]);
            r[(i, j)] = s / r[(i, i)];
        }
        let cj = &r.col(j)[..j];
        let d = g[(j, j)] - dot(cj, cj);
        if d <= 0.0 || !d.is_finite() {
            // Zero the partially written column so the leading block stays clean.
            r.col_mut(j).fill(0.0);
            return Ok((r, Some(j + 1)));
        }
        r[(j, j)] = d.sqrt();
    }
    Ok((r, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::householder_qr;
    use crate::linalg::svd_values;
    use crate::testmat::{gen_gaussian, gen_spectral, SpectrumSpec};

    #[test]
    fn cholesky_identity_and_failure() {
        assert_eq!(cholesky(&DenseMatrix::identity(4)).unwrap(), DenseMatrix::identity(4));
        let g = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, -1.0]]).unwrap();
        match cholesky(&g) {
            Err(Error::NotPositiveDefinite { index }) => assert_eq!(index, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cholesky_of_gram_reproduces_gram() {
        let m = gen_gaussian(100, 5, 21);
        let g = gram(&m);
        let r = cholesky(&g).unwrap();
        let err = r.transpose().matmul(&r).sub(&g).frobenius_norm();
        assert!(err <= 1e-14 * g.frobenius_norm(), "{err}");
    }

    #[test]
    fn gram_matches_naive_dots() {
        let m = gen_gaussian(700, 6, 5);
        let g = gram(&m);
        for i in 0..6 {
            for j in 0..6 {
                let naive: f64 = (0..700).map(|r| m[(r, i)] * m[(r, j)]).sum();
                assert!((g[(i, j)] - naive).abs() <= 1e-15 * 700.0 * naive.abs().max(1.0));
                assert_eq!(g[(i, j)], g[(j, i)]);
            }
        }
        assert_eq!(gram(&DenseMatrix::identity(3)), DenseMatrix::identity(3));
        let ones = DenseMatrix::from_col_major(3, 1, vec![1.0; 3]).unwrap();
        assert_eq!(gram(&ones)[(0, 0)], 3.0);
    }

    #[test]
    fn trsm_right_basic_cases() {
        let m = gen_gaussian(30, 4, 8);
        assert_eq!(trsm_right(&m, &DenseMatrix::identity(4)).unwrap(), m);

        let (_, r) = householder_qr(&gen_gaussian(20, 4, 9)).unwrap();
        let x = trsm_right(&r, &r).unwrap();
        assert!(x.sub(&DenseMatrix::identity(4)).max_abs() < 1e-13);

        let mut singular = r.clone();
        singular[(2, 2)] = 0.0;
        assert!(matches!(
            trsm_right(&m, &singular),
            Err(Error::SingularTriangular { index: 2 })
        ));
    }

    #[test]
    fn trsm_right_orthonormalizes_with_own_r() {
        let m = gen_gaussian(200, 20, 12);
        let (_, r) = householder_qr(&m).unwrap();
        let x = trsm_right(&m, &r).unwrap();
        let s = svd_values(&x).unwrap();
        assert!((s[0] / s[19] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn trsm_right_recovers_q_for_moderate_cond() {
        let m = gen_spectral(300, 12, &SpectrumSpec::PolynomialDecay { cond: 1e6 }, 2).unwrap();
        let (q, r) = householder_qr(&m).unwrap();
        let back = trsm_right(&q.matmul(&r), &r).unwrap();
        assert!(back.sub(&q).max_abs() < 1e-12 * 1e3);
    }

    #[test]
    fn upper_solves_agree_with_products() {
        let (_, r) = householder_qr(&gen_gaussian(10, 5, 1)).unwrap();
        let b = gen_gaussian(5, 2, 2);
        let x = solve_upper(&r, &b).unwrap();
        assert!(r.matmul(&x).sub(&b).max_abs() < 1e-12);
        let mut y = b.col(0).to_vec();
        upper_tr_solve_in_place(&r, &mut y);
        let back = r.transpose().matvec(&y);
        for (u, v) in back.iter().zip(b.col(0)) {
            assert!((u - v).abs() < 1e-12);
        }
        let p = upper_matmul(&r, &b);
        assert!(p.sub(&r.matmul(&b)).max_abs() < 1e-14);
    }
}
