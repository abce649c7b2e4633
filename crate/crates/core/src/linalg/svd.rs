//! One-sided (Hestenes) Jacobi SVD. Used as the accuracy oracle for singular
//! values throughout the crate, so it favours accuracy over speed.

use super::householder::Reflectors;
use super::matrix::{dot, norm2, DenseMatrix};
use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 60;

/// Thin singular value decomposition `M = U diag(s) Vᵀ`, `s` descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    pub v: DenseMatrix,
}

/// Singular values of `m` in descending order (`min(rows, cols)` of them).
pub fn svd_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    if m.rows() >= m.cols() {
        let mut work = tall_core(m);
        jacobi(&mut work, None)?;
        Ok(sorted_norms(&work).0)
    } else {
        svd_values(&m.transpose())
    }
}

/// Full thin SVD with singular vectors.
pub fn svd(m: &DenseMatrix) -> Result<Svd> {
    if m.rows() < m.cols() {
        let t = svd(&m.transpose())?;
        return Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }
    let (rows, n) = m.shape();
    let reflectors = (rows > n).then(|| Reflectors::factor(m.clone()));
    let mut work = match &reflectors {
        Some(f) => f.r(n),
        None => m.clone(),
    };
    let mut v = DenseMatrix::identity(n);
    jacobi(&mut work, Some(&mut v))?;
    let (s, order) = sorted_norms(&work);

    let mut u_small = DenseMatrix::zeros(work.rows(), n);
    let mut v_sorted = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let sigma = s[dst];
        if sigma > 0.0 {
            for (o, x) in u_small.col_mut(dst).iter_mut().zip(work.col(src)) {
                *o = x / sigma;
            }
        }
        v_sorted.col_mut(dst).copy_from_slice(v.col(src));
    }
    let u = match reflectors {
        Some(f) => {
            let mut u = DenseMatrix::zeros(rows, n);
            u.set_block(0, 0, &u_small);
            f.apply_q(f.count(), &mut u);
            u
        }
        None => u_small,
    };
    Ok(Svd { u, s, v: v_sorted })
}

/// Square working matrix with the same singular values: the R factor for
/// strictly tall input, the matrix itself otherwise.
fn tall_core(m: &DenseMatrix) -> DenseMatrix {
    if m.rows() > m.cols() {
        Reflectors::factor(m.clone()).r(m.cols())
    } else {
        m.clone()
    }
}

fn sorted_norms(a: &DenseMatrix) -> (Vec<f64>, Vec<usize>) {
    let norms: Vec<f64> = (0..a.cols()).map(|j| norm2(a.col(j))).collect();
    let mut order: Vec<usize> = (0..a.cols()).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));
    (order.iter().map(|&j| norms[j]).collect(), order)
}

/// Orthogonalizes the columns of `a` by plane rotations, accumulating them in `v`.
fn jacobi(a: &mut DenseMatrix, mut v: Option<&mut DenseMatrix>) -> Result<()> {
    let n = a.cols();
    if n < 2 {
        return Ok(());
    }
    let tol = f64::EPSILON * (a.rows().max(n) as f64);
    let mut sq: Vec<f64> = (0..n).map(|j| dot(a.col(j), a.col(j))).collect();
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = sq[p];
                let beta = sq[q];
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = {
                    let (ap, aq) = a.two_cols_mut(p, q);
                    dot(ap, aq)
                };
                if gamma.abs() <= tol * (alpha.sqrt() * beta.sqrt()) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(a, p, q, c, s);
                if let Some(v) = v.as_deref_mut() {
                    rotate(v, p, q, c, s);
                }
                let (ap, aq) = a.two_cols_mut(p, q);
                sq[p] = dot(ap, ap);
                sq[q] = dot(aq, aq);
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(Error::SvdNoConvergence { sweeps: MAX_SWEEPS })
}

#[inline]
fn rotate(a: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let (ap, aq) = a.two_cols_mut(p, q);
    for (x, y) in ap.iter_mut().zip(aq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}
