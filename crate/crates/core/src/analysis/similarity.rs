//! Quasi-optimality of a max-norm pivot chosen on the sketch.
//!
//! With the first `ℓ` pivots fixed by max-norm pivoting on `M`, let
//! `Φ(j) = ‖(I − Π_{M_ℓ}) M[:, j]‖₂`. The next pivot `p` maximizes `Φ`; the
//! sketched pivot `p̃` maximizes the same quantity computed from `SM`. The
//! check measures how much of `Φ(p)` the sketched choice retains.

use crate::error::{Error, Result};
use crate::linalg::{householder_qr, norm2, svd_values, DenseMatrix};
use crate::qrcp::qrcp_gram_schmidt;
use crate::sketching::{diagnostics, range_basis, SketchOperator, SubspaceDiagnostics};

/// Additive slack on both bounds.
pub const SIMILARITY_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityReport {
    pub ell: usize,
    pub rank: usize,
    /// Next max-norm pivot on `M`.
    pub p: usize,
    /// Next max-norm pivot on `SM`.
    pub p_sketch: usize,
    pub phi_p: f64,
    pub phi_p_sketch: f64,
    /// `σ_{k−ℓ}/σ₁` of the restricted singular values of `S` on `range(M)`.
    pub sigma_ratio: f64,
    /// `σ_k/σ₁`, which always bounds `delta_ratio` from below.
    pub restricted_ratio: f64,
    /// Effective distortion of `(I − Π_{SM_ℓ})S` on `range((I − Π_{M_ℓ})M)`.
    pub delta_ell: f64,
    /// `(1 − δ_ℓ)/(1 + δ_ℓ)`.
    pub delta_ratio: f64,
    /// `Φ(p̃) − σ_ratio·Φ(p)`.
    pub slack_sigma: f64,
    /// `Φ(p̃) − delta_ratio·Φ(p)`.
    pub slack_delta: f64,
}

impl SimilarityReport {
    pub fn holds(&self) -> bool {
        self.slack_sigma >= -SIMILARITY_SLACK && self.slack_delta >= -SIMILARITY_SLACK
    }
}

/// `X − Q(QᵀX)` for orthonormal `Q`.
fn project_out(q: &DenseMatrix, x: &DenseMatrix) -> DenseMatrix {
    if q.cols() == 0 {
        return x.clone();
    }
    x.sub(&q.matmul(&q.tr_matmul(x)))
}

fn orthonormal_basis(x: &DenseMatrix) -> Result<DenseMatrix> {
    if x.cols() == 0 {
        return Ok(DenseMatrix::zeros(x.rows(), 0));
    }
    Ok(householder_qr(x)?.0)
}

fn column_norms(x: &DenseMatrix) -> Vec<f64> {
    (0..x.cols()).map(|j| norm2(x.col(j))).collect()
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Evaluates both lower bounds on `Φ(p̃)` at step `ℓ < rank(M)`.
pub fn maxnorm_similarity_check(m: &DenseMatrix, s: &SketchOperator, ell: usize) -> Result<SimilarityReport> {
    let restricted = diagnostics(s, m)?;
    let sigma = &restricted.restricted_singular_values;
    let k = sigma.len();
    if ell >= k {
        return Err(Error::InvalidArgument(format!("need ell < rank(M) = {k}, got {ell}")));
    }
    let lead = &qrcp_gram_schmidt(m, 0.0).pivots[..ell];

    let q = orthonormal_basis(&m.select_cols(lead))?;
    let nmat = project_out(&q, m);
    let phi = column_norms(&nmat);
    let p = argmax(&phi);

    let sm = s.apply(m)?;
    let q_sk = orthonormal_basis(&sm.select_cols(lead))?;
    let p_sketch = argmax(&column_norms(&project_out(&q_sk, &sm)));

    let basis = range_basis(&nmat)?;
    let t_basis = project_out(&q_sk, &s.apply(&basis)?);
    let sv = svd_values(&t_basis)?;
    let dim = t_basis.rows().max(t_basis.cols());
    let delta_ell = SubspaceDiagnostics::from_singular_values(sv, basis.cols(), dim).effective_distortion;
    let delta_ratio = (1.0 - delta_ell) / (1.0 + delta_ell);

    let rel = |j: usize| if sigma[0] == 0.0 { 0.0 } else { sigma[j] / sigma[0] };
    let (sigma_ratio, restricted_ratio) = (rel(k - ell - 1), rel(k - 1));
    let (phi_p, phi_p_sketch) = (phi[p], phi[p_sketch]);
    Ok(SimilarityReport {
        ell,
        rank: k,
        p,
        p_sketch,
        phi_p,
        phi_p_sketch,
        sigma_ratio,
        restricted_ratio,
        delta_ell,
        delta_ratio,
        slack_sigma: phi_p_sketch - sigma_ratio * phi_p,
        slack_delta: phi_p_sketch - delta_ratio * phi_p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketching::SketchFamily;
    use crate::testmat::gen_gaussian;

    #[test]
    fn orthogonal_sketch_keeps_the_pivot() {
        let m = gen_gaussian(16, 6, 1);
        let s = SketchOperator::sample(SketchFamily::Srft, 16, 16, 2).unwrap();
        for ell in 0..6 {
            let rep = maxnorm_similarity_check(&m, &s, ell).unwrap();
            assert_eq!(rep.p, rep.p_sketch);
            assert!(rep.holds(), "{rep:?}");
        }
    }

    #[test]
    fn gaussian_sketch_bounds_hold() {
        let m = gen_gaussian(50, 20, 3);
        let s = SketchOperator::sample(SketchFamily::Gaussian, 22, 50, 4).unwrap();
        let mut last = 0.0;
        for ell in 0..=10 {
            let rep = maxnorm_similarity_check(&m, &s, ell).unwrap();
            assert!(rep.holds(), "{rep:?}");
            // Interlacing on the trailing block only guarantees σ_k/σ₁.
            assert!(rep.delta_ratio >= rep.restricted_ratio - 1e-12, "{rep:?}");
            assert!(rep.sigma_ratio >= last);
            last = rep.sigma_ratio;
        }
    }

    #[test]
    fn ell_must_be_below_rank() {
        let m = gen_gaussian(10, 3, 1);
        let s = SketchOperator::sample(SketchFamily::Gaussian, 5, 10, 1).unwrap();
        assert!(maxnorm_similarity_check(&m, &s, 3).is_err());
    }
}
