//! Unpivoted Householder QR and the reflector machinery shared with the
//! pivoted routines.

use super::matrix::{axpy, dot, norm2, DenseMatrix};
use crate::error::{Error, Result};

/// Columns of the right-hand side updated together when applying reflectors.
const COL_BLOCK: usize = 8;

/// Householder factorization in packed form: `R` on and above the diagonal,
/// the essential part of each reflector (`v[0] = 1` implied) below it.
#[derive(Clone, Debug)]
pub(crate) struct Reflectors {
    pub(crate) packed: DenseMatrix,
    pub(crate) tau: Vec<f64>,
}

/// Turns `x` into `H = I - τ v vᵀ` with `H x = β e₁`. On return `x[0] = β`
/// and `x[1..]` holds `v[1..]`. `τ = 0` means `H = I`.
pub(crate) fn make_reflector(x: &mut [f64]) -> f64 {
    if x.len() <= 1 {
        return 0.0;
    }
    let alpha = x[0];
    let xnorm = norm2(&x[1..]);
    if xnorm == 0.0 {
        return 0.0;
    }
    let beta = -alpha.signum() * alpha.hypot(xnorm);
    let tau = (beta - alpha) / beta;
    let scale = 1.0 / (alpha - beta);
    for v in &mut x[1..] {
        *v *= scale;
    }
    x[0] = beta;
    tau
}

/// Applies `I - τ v vᵀ` to `col`, where `col` starts at the reflector's pivot row.
#[inline]
pub(crate) fn apply_reflector(v_tail: &[f64], tau: f64, col: &mut [f64]) {
    if tau == 0.0 {
        return;
    }
    let (head, tail) = col.split_first_mut().expect("non-empty column");
    let w = tau * (*head + dot(v_tail, tail));
    *head -= w;
    axpy(-w, v_tail, tail);
}

impl Reflectors {
    /// Unpivoted factorization of `a`, producing `min(m, n)` reflectors.
    pub(crate) fn factor(mut a: DenseMatrix) -> Self {
        let (m, n) = a.shape();
        let steps = m.min(n);
        let mut tau = Vec::with_capacity(steps);
        for i in 0..steps {
            let t = make_reflector(&mut a.col_mut(i)[i..]);
            tau.push(t);
            if t != 0.0 {
                for j in i + 1..n {
                    let (ci, cj) = a.two_cols_mut(i, j);
                    apply_reflector(&ci[i + 1..], t, &mut cj[i..]);
                }
            }
        }
        Self { packed: a, tau }
    }

    pub(crate) fn count(&self) -> usize {
        self.tau.len()
    }

    /// Leading `k` rows of the triangular factor.
    pub(crate) fn r(&self, k: usize) -> DenseMatrix {
        let n = self.packed.cols();
        let mut r = DenseMatrix::zeros(k, n);
        for j in 0..n {
            let top = (j + 1).min(k);
            r.col_mut(j)[..top].copy_from_slice(&self.packed.col(j)[..top]);
        }
        r
    }

    /// `B <- H_0 H_1 ... H_{r-1} B`, using the first `r` reflectors.
    pub(crate) fn apply_q(&self, r: usize, b: &mut DenseMatrix) {
        assert_eq!(b.rows(), self.packed.rows());
        let ncols = b.cols();
        let mut c0 = 0;
        while c0 < ncols {
            let c1 = (c0 + COL_BLOCK).min(ncols);
            for j in (0..r).rev() {
                let t = self.tau[j];
                if t == 0.0 {
                    continue;
                }
                let v = &self.packed.col(j)[j + 1..];
                for c in c0..c1 {
                    apply_reflector(v, t, &mut b.col_mut(c)[j..]);
                }
            }
            c0 = c1;
        }
    }

    /// `B <- H_{r-1} ... H_0 B`, i.e. `Qᵀ B`.
    #[cfg(test)]
    pub(crate) fn apply_qt(&self, r: usize, b: &mut DenseMatrix) {
        assert_eq!(b.rows(), self.packed.rows());
        let ncols = b.cols();
        let mut c0 = 0;
        while c0 < ncols {
            let c1 = (c0 + COL_BLOCK).min(ncols);
            for j in 0..r {
                let t = self.tau[j];
                if t == 0.0 {
                    continue;
                }
                let v = &self.packed.col(j)[j + 1..];
                for c in c0..c1 {
                    apply_reflector(v, t, &mut b.col_mut(c)[j..]);
                }
            }
            c0 = c1;
        }
    }

    /// Explicit `m x k` orthonormal factor built from the first `k` reflectors.
    pub(crate) fn thin_q(&self, k: usize) -> DenseMatrix {
        let m = self.packed.rows();
        let mut q = DenseMatrix::from_diagonal(m, k, &vec![1.0; k]);
        // Column c of [I; 0] is untouched by reflectors j > c, so each block
        // only needs reflectors below its last column.
        let mut c0 = 0;
        while c0 < k {
            let c1 = (c0 + COL_BLOCK).min(k);
            for j in (0..c1).rev() {
                let t = self.tau[j];
                if t == 0.0 {
                    continue;
                }
                let v = &self.packed.col(j)[j + 1..];
                for c in c0.max(j)..c1 {
                    apply_reflector(v, t, &mut q.col_mut(c)[j..]);
                }
            }
            c0 = c1;
        }
        q
    }
}

/// Thin Householder QR of a tall matrix: `Q` is `m x n`, `R` is `n x n`.
///
/// Rank deficiency shows up as small or zero diagonal entries of `R`.
pub fn householder_qr(m: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let (rows, cols) = m.shape();
    if rows < cols {
        return Err(Error::DimensionMismatch(format!(
            "householder_qr needs rows >= cols, got {rows}x{cols}"
        )));
    }
    let f = Reflectors::factor(m.clone());
    Ok((f.thin_q(cols), f.r(cols)))
}

/// Triangular factor only; skips forming `Q`.
pub fn householder_r(m: &DenseMatrix) -> DenseMatrix {
    let f = Reflectors::factor(m.clone());
    let k = m.rows().min(m.cols());
    f.r(k)
}
