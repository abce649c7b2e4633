//! How the R factor of `M[:, J]` inherits the RRQR behaviour of the R factor
//! of `(SM)[:, J]`, for an arbitrary fixed pivot vector `J`.

use crate::error::{Error, Result};
use crate::linalg::{householder_r, svd_values, DenseMatrix};
use crate::sketching::{diagnostics, SketchOperator, RANGE_DROP_TOL};

use super::rrqr::{interp_norm, ratio};

/// Additive slack allowed on every inequality.
pub const INHERITANCE_SLACK: f64 = 1e-9;

/// Per-`ℓ` slacks (`rhs − lhs` oriented so that non-negative means the bound
/// holds exactly). Entry `ℓ − 1` covers the `ℓ x ℓ` leading block.
#[derive(Clone, Debug, PartialEq)]
pub struct InheritanceReport {
    pub rank: usize,
    /// Effective distortion of `S` on `range(M)`.
    pub delta: f64,
    /// Leading-block singular values.
    pub slack_leading: Vec<f64>,
    /// Trailing-block singular values; infinite when vacuous.
    pub slack_trailing: Vec<f64>,
    /// Interpolation matrix `A_ℓ⁻¹B_ℓ`.
    pub slack_interp: Vec<f64>,
}

impl InheritanceReport {
    pub fn holds(&self, l: usize) -> [bool; 3] {
        [&self.slack_leading, &self.slack_trailing, &self.slack_interp]
            .map(|s| s[l - 1] >= -INHERITANCE_SLACK)
    }

    pub fn all_hold(&self) -> bool {
        (1..=self.rank).all(|l| self.holds(l).iter().all(|&b| b))
    }
}

fn numerical_rank(sigma: &[f64]) -> usize {
    let top = sigma.first().copied().unwrap_or(0.0);
    sigma.iter().filter(|&&s| s > RANGE_DROP_TOL * top).count()
}

/// Evaluates the three inheritance inequalities for every `ℓ ≤ rank(M)`.
pub fn inheritance_check(m: &DenseMatrix, s: &SketchOperator, pivots: &[usize]) -> Result<InheritanceReport> {
    let n = m.cols();
    if pivots.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "pivot vector has {} entries for {n} columns",
            pivots.len()
        )));
    }
    let sm = s.apply(m)?;
    let sig_m = svd_values(m)?;
    let sig_sm = svd_values(&sm)?;
    let (rank_m, rank_sm) = (numerical_rank(&sig_m), numerical_rank(&sig_sm));
    if rank_m != rank_sm {
        return Err(Error::RankMismatch { rank_m, rank_sm });
    }
    let k = rank_m;
    let delta = diagnostics(s, m)?.effective_distortion;
    let rho = (1.0 - delta) / (1.0 + delta);

    let r = householder_r(&m.select_cols(pivots));
    let rs = householder_r(&sm.select_cols(pivots));
    let (kr, ks) = (r.rows(), rs.rows());

    let mut rep = InheritanceReport {
        rank: k,
        delta,
        slack_leading: Vec::with_capacity(k),
        slack_trailing: Vec::with_capacity(k),
        slack_interp: Vec::with_capacity(k),
    };
    for l in 1..=k {
        let a = r.submatrix(0..l, 0..l);
        let a_sk = rs.submatrix(0..l, 0..l);
        let sa = svd_values(&a)?;
        let sa_sk = svd_values(&a_sk)?;
        rep.slack_leading.push(
            (0..l)
                .map(|j| sa[j] / sig_m[j] - rho * sa_sk[j] / sig_sm[j])
                .fold(f64::INFINITY, f64::min),
        );

        let c = r.submatrix(l..kr, l..n);
        let c_sk = rs.submatrix(l..ks, l..n);
        let trailing = if l < k {
            let sc = svd_values(&c)?;
            let sc_sk = svd_values(&c_sk)?;
            (0..k - l)
                .map(|j| ratio(sc_sk[j], sig_sm[l + j]) / rho - ratio(sc[j], sig_m[l + j]))
                .fold(f64::INFINITY, f64::min)
        } else {
            f64::INFINITY
        };
        rep.slack_trailing.push(trailing);

        let lhs = interp_norm(&a, &r.submatrix(0..l, l..n))?;
        let c_sk_norm = if c_sk.rows() == 0 || c_sk.cols() == 0 {
            0.0
        } else {
            svd_values(&c_sk)?[0]
        };
        let smin = sa_sk[l - 1];
        let rhs = interp_norm(&a_sk, &rs.submatrix(0..l, l..n))? + ratio(c_sk_norm, smin) / rho;
        rep.slack_interp.push(rhs - lhs);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketching::SketchFamily;
    use crate::testmat::{gen_exact_rank, gen_gaussian};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orthogonal_sketch_is_tight() {
        // An SRFT keeping every row of a power-of-two dimension is orthogonal.
        let m = gen_gaussian(8, 5, 1);
        let s = SketchOperator::sample(SketchFamily::Srft, 8, 8, 0).unwrap();
        let rep = inheritance_check(&m, &s, &[4, 2, 0, 1, 3]).unwrap();
        assert!(rep.delta <= 1e-14);
        assert!(rep.all_hold(), "{rep:?}");
        assert!(rep.slack_leading.iter().all(|v| v.abs() <= 1e-12), "{rep:?}");
    }

    #[test]
    fn rank_five_random_pivots() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for seed in 0..10 {
            let m = gen_exact_rank(12, 8, 5, seed);
            let s = SketchOperator::sample(SketchFamily::Gaussian, 8, 12, 100 + seed).unwrap();
            let mut j: Vec<usize> = (0..8).collect();
            j.shuffle(&mut rng);
            let rep = inheritance_check(&m, &s, &j).unwrap();
            assert_eq!(rep.rank, 5);
            assert!(rep.all_hold(), "{rep:?}");
        }
    }

    #[test]
    fn rank_mismatch_detected() {
        let m = gen_gaussian(12, 6, 2);
        let s = SketchOperator::sample(SketchFamily::Gaussian, 4, 12, 3).unwrap();
        assert!(matches!(
            inheritance_check(&m, &s, &[0, 1, 2, 3, 4, 5]),
            Err(Error::RankMismatch { rank_m: 6, rank_sm: 4 })
        ));
    }
}
