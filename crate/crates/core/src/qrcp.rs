//! QR with max-norm column pivoting.
//!
//! [`qrcp_maxnorm`] is the Householder routine with column-norm downdating.
//! [`qrcp_gram_schmidt`] recomputes every working norm from explicitly
//! projected columns; it exists to cross-check the Householder pivots.

use crate::error::Result;
use crate::linalg::{
    apply_reflector, make_reflector, norm2, orthogonality_loss, DenseMatrix, Reflectors,
    UNIT_ROUNDOFF,
};

/// A column-pivoted QR factorization `M[:, J] ≈ Q·R` truncated at rank `k`.
///
/// Pivots are 0-based column indices of the input.
#[derive(Clone, Debug, PartialEq)]
pub struct PivotedQR {
    /// `m x k`, orthonormal columns.
    pub q: DenseMatrix,
    /// `k x n`, upper trapezoidal.
    pub r: DenseMatrix,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

/// Triangular factor and pivots of a QRCP, without an explicit `Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct PivotedR {
    pub r: DenseMatrix,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

/// Default relative stopping tolerance, `n·u`.
pub fn default_rank_tol(n: usize) -> f64 {
    n.max(1) as f64 * UNIT_ROUNDOFF
}

/// Index of the strictly largest entry, lowest index on ties.
fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

struct Pivoted {
    reflectors: Reflectors,
    pivots: Vec<usize>,
    rank: usize,
}

fn householder_pivoted(m: &DenseMatrix, rank_tol: f64) -> Pivoted {
    let (rows, n) = m.shape();
    let mut a = m.clone();
    let mut pivots: Vec<usize> = (0..n).collect();
    let mut norms: Vec<f64> = (0..n).map(|j| norm2(a.col(j))).collect();
    let mut reference = norms.clone();
    let initial_max = norms.iter().fold(0.0f64, |x, &y| x.max(y));
    let threshold = rank_tol * initial_max;
    // Downdates whose relative size falls below this are recomputed.
    let recompute_below = UNIT_ROUNDOFF.sqrt();
    let mut tau = Vec::new();
    let steps = rows.min(n);
    for i in 0..steps {
        let p = i + argmax(&norms[i..]);
        if norms[p] == 0.0 || norms[p] <= threshold {
            break;
        }
        if p != i {
            a.swap_cols(i, p);
            pivots.swap(i, p);
            norms.swap(i, p);
            reference.swap(i, p);
        }
        let t = make_reflector(&mut a.col_mut(i)[i..]);
        tau.push(t);
        for j in i + 1..n {
            let (ci, cj) = a.two_cols_mut(i, j);
            apply_reflector(&ci[i + 1..], t, &mut cj[i..]);
            if norms[j] == 0.0 {
                continue;
            }
            let ratio = cj[i].abs() / norms[j];
            let shrink = ((1.0 + ratio) * (1.0 - ratio)).max(0.0);
            let rel = norms[j] / reference[j];
            if shrink * rel * rel <= recompute_below {
                norms[j] = norm2(&cj[i + 1..]);
                reference[j] = norms[j];
            } else {
                norms[j] *= shrink.sqrt();
            }
        }
    }
    let rank = tau.len();
    Pivoted {
        reflectors: Reflectors { packed: a, tau },
        pivots,
        rank,
    }
}

/// Householder QRCP with max-norm pivoting.
///
/// At each step the column with the largest downdated trailing norm is
/// brought forward. The process stops once that norm is at most
/// `rank_tol` times the largest initial column norm; the number of completed
/// steps is the returned rank.
pub fn qrcp_maxnorm(m: &DenseMatrix, rank_tol: f64) -> PivotedQR {
    let f = householder_pivoted(m, rank_tol);
    PivotedQR {
        q: f.reflectors.thin_q(f.rank),
        r: f.reflectors.r(f.rank),
        pivots: f.pivots,
        rank: f.rank,
    }
}

/// [`qrcp_maxnorm`] without forming `Q`.
pub fn qrcp_maxnorm_r(m: &DenseMatrix, rank_tol: f64) -> PivotedR {
    let f = householder_pivoted(m, rank_tol);
    PivotedR {
        r: f.reflectors.r(f.rank),
        pivots: f.pivots,
        rank: f.rank,
    }
}

/// Max-norm pivoting by modified Gram–Schmidt with explicit projections of
/// the trailing columns. Norms are recomputed from scratch every step.
pub fn qrcp_gram_schmidt(m: &DenseMatrix, rank_tol: f64) -> PivotedQR {
    let (rows, n) = m.shape();
    let mut b = m.clone();
    let mut pivots: Vec<usize> = (0..n).collect();
    let steps = rows.min(n);
    let mut r = DenseMatrix::zeros(steps, n);
    let initial_max = (0..n).map(|j| norm2(b.col(j))).fold(0.0f64, f64::max);
    let threshold = rank_tol * initial_max;
    let mut rank = 0;
    for i in 0..steps {
        let norms: Vec<f64> = (i..n).map(|j| norm2(b.col(j))).collect();
        let p = i + argmax(&norms);
        let pn = norms[p - i];
        if pn == 0.0 || pn <= threshold {
            break;
        }
        if p != i {
            b.swap_cols(i, p);
            r.swap_cols(i, p);
            pivots.swap(i, p);
        }
        r[(i, i)] = pn;
        for x in b.col_mut(i) {
            *x /= pn;
        }
        for j in i + 1..n {
            let (qi, bj) = b.two_cols_mut(i, j);
            let c = crate::linalg::dot(qi, bj);
            r[(i, j)] = c;
            for (y, q) in bj.iter_mut().zip(qi.iter()) {
                *y -= c * q;
            }
        }
        rank = i + 1;
    }
    PivotedQR {
        q: b.leading_cols(rank),
        r: r.submatrix(0..rank, 0..n),
        pivots,
        rank,
    }
}

/// Measured quality of a pivoted factorization.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    /// `‖QᵀQ − I‖₂`.
    pub orthogonality_loss: f64,
    /// `‖M[:, J] − Q·R‖_F / ‖M‖_F` (absolute when `M = 0`).
    pub reconstruction_error: f64,
    pub triangular: bool,
    pub permutation: bool,
    pub shapes_consistent: bool,
    pub tol: f64,
    pub pass: bool,
}

/// Checks orthogonality, reconstruction, triangularity and that `J` is a
/// permutation, against a single tolerance.
pub fn validate(dec: &PivotedQR, m: &DenseMatrix, tol: f64) -> Result<ValidationReport> {
    let n = m.cols();
    let mut seen = vec![false; n];
    let permutation = dec.pivots.len() == n
        && dec.pivots.iter().all(|&j| j < n && !std::mem::replace(&mut seen[j], true));
    let k = dec.rank;
    let shapes_consistent = dec.q.shape() == (m.rows(), k) && dec.r.shape() == (k, n);
    let triangular = (0..dec.r.cols())
        .all(|j| (j + 1..dec.r.rows()).all(|i| dec.r[(i, j)] == 0.0));
    let orthogonality_loss = orthogonality_loss(&dec.q)?;
    let reconstruction_error = if permutation && shapes_consistent {
        let diff = m.select_cols(&dec.pivots).sub(&dec.q.matmul(&dec.r));
        let scale = m.frobenius_norm();
        let err = diff.frobenius_norm();
        if scale > 0.0 {
            err / scale
        } else {
            err
        }
    } else {
        f64::INFINITY
    };
    let pass = permutation
        && shapes_consistent
        && triangular
        && orthogonality_loss <= tol
        && reconstruction_error <= tol;
    Ok(ValidationReport {
        orthogonality_loss,
        reconstruction_error,
        triangular,
        permutation,
        shapes_consistent,
        tol,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testmat::{gen_gaussian, gen_kahan, gen_kahan_perturbed, KAHAN_PERTURBATION};

    #[test]
    fn diagonal_pivots_by_norm() {
        let m = DenseMatrix::from_diagonal(3, 3, &[1.0, 5.0, 3.0]);
        for f in [qrcp_maxnorm(&m, 1e-15), qrcp_gram_schmidt(&m, 1e-15)] {
            assert_eq!(f.pivots, vec![1, 2, 0]);
            let d: Vec<f64> = f.r.diagonal().iter().map(|v| v.abs()).collect();
            assert_eq!(d, vec![5.0, 3.0, 1.0]);
        }
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let f = qrcp_maxnorm(&DenseMatrix::zeros(4, 3), default_rank_tol(3));
        assert_eq!(f.rank, 0);
        assert_eq!(f.pivots, vec![0, 1, 2]);
        assert_eq!(f.q.shape(), (4, 0));
        assert_eq!(f.r.shape(), (0, 3));
    }

    #[test]
    fn kahan_is_not_pivoted() {
        let k = gen_kahan_perturbed(16, 0.285, KAHAN_PERTURBATION).unwrap();
        let f = qrcp_maxnorm(&k, default_rank_tol(16));
        assert_eq!(f.pivots, (0..16).collect::<Vec<_>>());
        let g = qrcp_gram_schmidt(&k, default_rank_tol(16));
        assert_eq!(g.pivots, f.pivots);
    }

    #[test]
    fn unperturbed_kahan_columns_tie() {
        let k = gen_kahan(16, 0.285).unwrap();
        for j in 0..16 {
            assert!((norm2(k.col(j)) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn seeded_factorization_validates() {
        let m = gen_gaussian(80, 20, 6);
        let f = qrcp_maxnorm(&m, default_rank_tol(20));
        let rep = validate(&f, &m, 100.0 * 20.0 * UNIT_ROUNDOFF).unwrap();
        assert!(rep.pass, "{rep:?}");
        let g = qrcp_gram_schmidt(&m, default_rank_tol(20));
        let resid = m.select_cols(&g.pivots).sub(&g.q.matmul(&g.r)).frobenius_norm();
        assert!(resid <= 1e-12 * m.frobenius_norm());
        assert_eq!(g.pivots, f.pivots);
    }

    #[test]
    fn diagonal_is_non_increasing() {
        let f = qrcp_maxnorm(&gen_gaussian(60, 30, 2), default_rank_tol(30));
        let d = f.r.diagonal();
        assert!(d.windows(2).all(|w| w[0].abs() >= w[1].abs()));
    }

    #[test]
    fn validate_flags_structural_problems() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let dec = PivotedQR {
            q: DenseMatrix::identity(2),
            r: m.clone(),
            pivots: vec![0, 1],
            rank: 2,
        };
        let rep = validate(&dec, &m, 1e-12).unwrap();
        assert!(!rep.triangular && !rep.pass);

        let mut f = qrcp_maxnorm(&m, 1e-15);
        f.pivots = vec![0, 0];
        let rep = validate(&f, &m, 1e-12).unwrap();
        assert!(!rep.permutation && !rep.pass);
    }

    #[test]
    fn rank_tolerance_truncates() {
        let a = gen_gaussian(30, 3, 1);
        let m = a.matmul(&gen_gaussian(3, 8, 2));
        let f = qrcp_maxnorm(&m, default_rank_tol(8) * 10.0);
        assert_eq!(f.rank, 3);
        assert!(validate(&f, &m, 1e-13).unwrap().pass);
    }
}
