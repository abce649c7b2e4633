//! Two-stage numerical rank selection.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{
    cholesky_partial, gram, inverse_norm_upper, power_iteration, trsm_right, DenseMatrix,
};

/// Relative inflation applied to power-iteration results so that they can be
/// used as upper bounds.
pub const KRYLOV_INFLATION: f64 = 1e-6;

/// Cap on consecutive Cholesky-failure fallbacks in stage two.
pub const MAX_CHOLESKY_RETRIES: usize = 3;

/// How the condition number of a triangular factor is estimated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum CondMethod {
    /// `max|x_ii| / min|x_ii|`.
    DiagRatio,
    /// Power iteration on `X` and on `X⁻¹` via triangular solves.
    KrylovBounds,
    /// `τ ≈ ‖I − X/α‖₂` with `α` the mean diagonal magnitude, giving
    /// `cond(X) ≤ (1+τ)/(1−τ)`. Infinite when `τ ≥ 1`.
    #[default]
    IdentityDeviation,
}

impl CondMethod {
    pub fn name(self) -> &'static str {
        match self {
            CondMethod::DiagRatio => "diag_ratio",
            CondMethod::KrylovBounds => "krylov_bounds",
            CondMethod::IdentityDeviation => "identity_deviation",
        }
    }
}

/// Whether an estimate bounds the true value from below or above.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundKind {
    Lower,
    Upper,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CondBound {
    pub value: f64,
    pub kind: BoundKind,
}

/// Stage one: `k₀ = min{ℓ : ‖C_ℓ‖_F ≤ u·max|R|}` for the upper-trapezoidal
/// factor `R` of the sketch. Returns 0 for the zero matrix.
pub fn rank_stage1(r_sk: &DenseMatrix, u: f64) -> usize {
    let s = r_sk.max_abs();
    if s == 0.0 {
        return 0;
    }
    let k = r_sk.rows().min(r_sk.cols());
    let limit = u * u;
    let mut mass = 0.0;
    let mut k0 = k;
    // C_ℓ gains row ℓ (from column ℓ on) when ℓ decreases; entries are
    // normalized by s so tiny tails neither underflow nor overflow.
    for l in (0..k).rev() {
        let row: f64 = (l..r_sk.cols()).map(|j| (r_sk[(l, j)] / s).powi(2)).sum();
        mass += row;
        if mass > limit {
            break;
        }
        k0 = l;
    }
    k0
}

fn diag_ratio(x: &DenseMatrix) -> f64 {
    let d: Vec<f64> = x.diagonal().iter().map(|v| v.abs()).collect();
    let hi = d.iter().fold(0.0f64, |a, &b| a.max(b));
    let lo = d.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if d.is_empty() {
        1.0
    } else if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

fn krylov(x: &DenseMatrix) -> f64 {
    let inv = inverse_norm_upper(x).value;
    if !inv.is_finite() {
        return f64::INFINITY;
    }
    let top = power_iteration(x.cols(), |v| x.matvec(v), |v| x.tr_matvec(v)).value;
    top * inv * (1.0 + KRYLOV_INFLATION)
}

fn identity_deviation(x: &DenseMatrix) -> f64 {
    let n = x.rows();
    if n == 0 {
        return 1.0;
    }
    let alpha = x.diagonal().iter().map(|v| v.abs()).sum::<f64>() / n as f64;
    if alpha == 0.0 {
        return f64::INFINITY;
    }
    let shifted = |v: &[f64], y: Vec<f64>| -> Vec<f64> {
        v.iter().zip(y).map(|(a, b)| a - b / alpha).collect()
    };
    let tau = power_iteration(n, |v| shifted(v, x.matvec(v)), |v| shifted(v, x.tr_matvec(v)))
        .value
        * (1.0 + KRYLOV_INFLATION);
    if tau >= 1.0 {
        f64::INFINITY
    } else {
        (1.0 + tau) / (1.0 - tau)
    }
}

/// Condition-number estimate for a square upper-triangular matrix.
pub fn cond_estimate(x: &DenseMatrix, method: CondMethod) -> CondBound {
    match method {
        CondMethod::DiagRatio => CondBound {
            value: diag_ratio(x),
            kind: BoundKind::Lower,
        },
        CondMethod::KrylovBounds => CondBound {
            value: krylov(x),
            kind: BoundKind::Upper,
        },
        CondMethod::IdentityDeviation => CondBound {
            value: identity_deviation(x),
            kind: BoundKind::Upper,
        },
    }
}

/// Estimate used by stage two. An identity-deviation bound above the
/// threshold is replaced by the Krylov bound when that is tighter; both are
/// upper bounds, so the smaller one still is.
fn stage2_estimate(x: &DenseMatrix, method: CondMethod, threshold: f64) -> CondBound {
    let est = cond_estimate(x, method);
    if method == CondMethod::IdentityDeviation && (est.value > threshold || est.value.is_nan()) {
        let kry = cond_estimate(x, CondMethod::KrylovBounds);
        if kry.value < est.value {
            return kry;
        }
    }
    est
}

/// Condition estimates of leading principal blocks, made monotone in the
/// block size by taking the running maximum over every block probed so far.
struct MonotoneProbe<'a> {
    r: &'a DenseMatrix,
    method: CondMethod,
    threshold: f64,
    seen: BTreeMap<usize, CondBound>,
}

impl<'a> MonotoneProbe<'a> {
    fn raw(&mut self, l: usize) -> CondBound {
        let (r, method, threshold) = (self.r, self.method, self.threshold);
        *self
            .seen
            .entry(l)
            .or_insert_with(|| stage2_estimate(&r.submatrix(0..l, 0..l), method, threshold))
    }

    fn at(&mut self, l: usize) -> CondBound {
        let own = self.raw(l);
        let below = self
            .seen
            .range(..l)
            .map(|(_, b)| b.value)
            .fold(f64::NEG_INFINITY, f64::max);
        CondBound {
            value: own.value.max(below),
            kind: own.kind,
        }
    }
}

/// Stage-two result.
#[derive(Clone, Debug, PartialEq)]
pub struct Stage2 {
    /// Final rank.
    pub k: usize,
    /// Leading `k x k` block of the Cholesky factor of the preconditioned Gram matrix.
    pub r_pre: DenseMatrix,
    /// `M_k₀·A_sk⁻¹`, all `k₀` columns.
    pub m_pre: DenseMatrix,
    /// Stage-one rank after any Cholesky-failure fallback.
    pub k0: usize,
    pub cholesky_failures: usize,
    /// Estimate of `cond(R_pre[..k, ..k])` at the accepted `k` (1 when `k = 0`).
    pub cond_pre: CondBound,
}

/// Cholesky of the preconditioned Gram matrix with the fallback of shrinking
/// to the leading block that did factor.
pub(crate) fn gram_cholesky_with_fallback(m_pre: &DenseMatrix) -> Result<(DenseMatrix, usize, usize)> {
    let g = gram(m_pre);
    let mut k0 = g.rows();
    let mut failures = 0;
    let (mut r, mut failed) = cholesky_partial(&g)?;
    while let Some(j) = failed {
        failures += 1;
        k0 = j - 1;
        if failures >= MAX_CHOLESKY_RETRIES || k0 == 0 {
            break;
        }
        // Refactor the leading block; its factor is what the failed attempt
        // had already produced, so this normally succeeds at once.
        let lead = g.submatrix(0..k0, 0..k0);
        (r, failed) = cholesky_partial(&lead)?;
    }
    if failed.is_some() && failures >= MAX_CHOLESKY_RETRIES {
        k0 = failed.map_or(k0, |j| j - 1);
    }
    Ok((r.submatrix(0..k0, 0..k0), k0, failures))
}

/// Largest `ℓ ≤ k₀` whose monotone condition estimate of `R_pre[..ℓ, ..ℓ]`
/// is at most `threshold`, by binary search.
pub(crate) fn search_rank(r_pre: &DenseMatrix, threshold: f64, method: CondMethod) -> (usize, CondBound) {
    let k0 = r_pre.rows();
    let one = CondBound {
        value: 1.0,
        kind: BoundKind::Upper,
    };
    if k0 == 0 {
        return (0, one);
    }
    let mut probe = MonotoneProbe {
        r: r_pre,
        method,
        threshold,
        seen: BTreeMap::new(),
    };
    let full = probe.at(k0);
    if full.value <= threshold {
        return (k0, full);
    }
    // Invariant: lo passes (0 passes vacuously), hi fails.
    let (mut lo, mut hi) = (0, k0);
    let mut best = one;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let est = probe.at(mid);
        if est.value <= threshold {
            lo = mid;
            best = est;
        } else {
            hi = mid;
        }
    }
    (lo, best)
}

/// Stage two: precondition, factor the Gram matrix (shrinking on Cholesky
/// failure) and pick `k = max{ℓ : cond(R_pre[..ℓ, ..ℓ]) ≤ √(ε_tol/u)}`.
pub fn rank_stage2(
    m_k0: &DenseMatrix,
    a_sk_k0: &DenseMatrix,
    eps_tol: f64,
    u: f64,
    method: CondMethod,
) -> Result<Stage2> {
    if a_sk_k0.rows() == 0 {
        return Err(Error::InvalidArgument("stage two needs k0 >= 1".into()));
    }
    let m_pre = trsm_right(m_k0, a_sk_k0)?;
    stage2_from_preconditioned(m_pre, eps_tol, u, method)
}

pub(crate) fn stage2_from_preconditioned(
    m_pre: DenseMatrix,
    eps_tol: f64,
    u: f64,
    method: CondMethod,
) -> Result<Stage2> {
    let (r_full, k0, failures) = gram_cholesky_with_fallback(&m_pre)?;
    let threshold = (eps_tol / u).sqrt();
    let (k, cond_pre) = search_rank(&r_full, threshold, method);
    Ok(Stage2 {
        k,
        r_pre: r_full.submatrix(0..k, 0..k),
        m_pre,
        k0,
        cholesky_failures: failures,
        cond_pre,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{householder_r, svd_values, UNIT_ROUNDOFF};
    use crate::testmat::gen_gaussian;

    const U52: f64 = f64::EPSILON;

    #[test]
    fn stage1_examples() {
        let r = DenseMatrix::from_diagonal(2, 2, &[1.0, 1e-20]);
        assert_eq!(rank_stage1(&r, U52), 1);
        assert_eq!(rank_stage1(&DenseMatrix::zeros(3, 3), U52), 0);
        let r = DenseMatrix::from_diagonal(4, 4, &[1.0, 1e-8, 1e-18, 1e-19]);
        assert_eq!(rank_stage1(&r, U52), 2);
        let r = DenseMatrix::from_diagonal(3, 3, &[1.0, 0.5, 0.25]);
        assert_eq!(rank_stage1(&r, U52), 3);
    }

    #[test]
    fn identity_estimates() {
        let i = DenseMatrix::identity(5);
        assert_eq!(cond_estimate(&i, CondMethod::DiagRatio).value, 1.0);
        assert_eq!(cond_estimate(&i, CondMethod::IdentityDeviation).value, 1.0);
        let k = cond_estimate(&i, CondMethod::KrylovBounds).value;
        assert!((k - 1.0).abs() <= 2.0 * KRYLOV_INFLATION);
        let d = DenseMatrix::from_diagonal(2, 2, &[10.0, 1.0]);
        assert_eq!(cond_estimate(&d, CondMethod::DiagRatio).value, 10.0);
    }

    #[test]
    fn estimates_sandwich_true_condition() {
        let r = householder_r(&gen_gaussian(64, 64, 3));
        let s = svd_values(&r).unwrap();
        let exact = s[0] / s[63];
        let lower = cond_estimate(&r, CondMethod::DiagRatio);
        let upper = cond_estimate(&r, CondMethod::KrylovBounds);
        assert_eq!(lower.kind, BoundKind::Lower);
        assert_eq!(upper.kind, BoundKind::Upper);
        assert!(lower.value <= exact && exact <= upper.value, "{} {exact} {}", lower.value, upper.value);
    }

    #[test]
    fn one_column_is_rank_one() {
        let m = gen_gaussian(30, 1, 2);
        let a = householder_r(&m);
        let st = rank_stage2(&m, &a, 1e4 * UNIT_ROUNDOFF, UNIT_ROUNDOFF, CondMethod::default()).unwrap();
        assert_eq!(st.k, 1);
    }

    #[test]
    fn rank_deficient_input_triggers_fallback() {
        let b = gen_gaussian(100, 4, 5);
        let c = gen_gaussian(4, 8, 6);
        let m = b.matmul(&c);
        // A nonsingular but unrelated preconditioner keeps the rank deficiency.
        let a = householder_r(&gen_gaussian(20, 8, 7));
        let st = rank_stage2(&m, &a, 1e4 * UNIT_ROUNDOFF, UNIT_ROUNDOFF, CondMethod::default()).unwrap();
        assert!(st.k <= 4, "k = {}", st.k);
    }

    #[test]
    fn search_is_monotone_in_threshold() {
        let r = householder_r(&gen_gaussian(40, 12, 9));
        let mut last = 0;
        for thr in [1.0, 2.0, 5.0, 10.0, 100.0, 1e4] {
            let (k, _) = search_rank(&r, thr, CondMethod::KrylovBounds);
            assert!(k >= last);
            last = k;
        }
    }
}
