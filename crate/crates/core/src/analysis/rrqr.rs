use crate::error::{Error, Result};
use crate::linalg::{solve_upper, svd_values, DenseMatrix};

/// Measured RRQR factors of a triangular factor against a reference spectrum.
/// Entry `ℓ − 1` holds the value for the `ℓ x ℓ` leading block.
#[derive(Clone, Debug, PartialEq)]
pub struct RrqrReport {
    /// `max_{j≤ℓ} σ_j(M) / σ_j(A_ℓ)`.
    pub f_lower: Vec<f64>,
    /// `max_{j≤k−ℓ} σ_j(C_ℓ) / σ_{ℓ+j}(M)`; 1 when the range is empty.
    pub f_upper: Vec<f64>,
    /// `‖A_ℓ⁻¹ B_ℓ‖₂`; infinite when `A_ℓ` is singular.
    pub g: Vec<f64>,
}

/// Growth factor `√(1 + 4ℓ(n − ℓ))` of strong RRQR with tuning parameter 2.
pub fn gu_eisenstat_f(l: usize, n: usize) -> f64 {
    (1.0 + 4.0 * l as f64 * n.saturating_sub(l) as f64).sqrt()
}

/// `2√ℓ`, the matching bound on `‖A_ℓ⁻¹ B_ℓ‖₂`.
pub fn gu_eisenstat_g(l: usize) -> f64 {
    2.0 * (l as f64).sqrt()
}

pub(crate) fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// `‖A⁻¹B‖₂` for square upper-triangular `A`.
pub(crate) fn interp_norm(a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
    if b.cols() == 0 {
        return Ok(0.0);
    }
    match solve_upper(a, b) {
        Ok(x) => Ok(svd_values(&x)?[0]),
        Err(Error::SingularTriangular { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Evaluates the RRQR factor definitions for every `ℓ ≤ k`, where `k` is the
/// number of rows of `r`.
pub fn rrqr_report(r: &DenseMatrix, sigma: &[f64]) -> Result<RrqrReport> {
    let (k, n) = r.shape();
    if k > n || sigma.len() < k {
        return Err(Error::DimensionMismatch(format!(
            "rrqr_report needs a k x n factor with k <= n and k singular values, got {k}x{n} and {}",
            sigma.len()
        )));
    }
    let mut rep = RrqrReport {
        f_lower: Vec::with_capacity(k),
        f_upper: Vec::with_capacity(k),
        g: Vec::with_capacity(k),
    };
    for l in 1..=k {
        let a = r.submatrix(0..l, 0..l);
        let sa = svd_values(&a)?;
        let fl = (0..l).map(|j| ratio(sigma[j], sa[j])).fold(0.0, f64::max);
        let fu = if l < k {
            let sc = svd_values(&r.submatrix(l..k, l..n))?;
            (0..k - l).map(|j| ratio(sc[j], sigma[l + j])).fold(0.0, f64::max)
        } else {
            1.0
        };
        rep.f_lower.push(fl);
        rep.f_upper.push(fu);
        rep.g.push(interp_norm(&a, &r.submatrix(0..l, l..n))?);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::householder_r;
    use crate::qrcp::{default_rank_tol, qrcp_maxnorm_r};
    use crate::testmat::{gen_gaussian, random_orthonormal};

    #[test]
    fn diagonal_case() {
        let r = DenseMatrix::from_diagonal(3, 3, &[3.0, 2.0, 1.0]);
        let rep = rrqr_report(&r, &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(rep.f_lower, vec![1.0; 3]);
        assert_eq!(rep.f_upper, vec![1.0; 3]);
        assert_eq!(rep.g, vec![0.0; 3]);
    }

    #[test]
    fn interlacing_keeps_factors_at_least_one() {
        let sigma = [5.0, 3.0, 2.0, 1.0, 0.5];
        let v = random_orthonormal(5, 5, 3);
        let m = random_orthonormal(40, 5, 4).matmul(&DenseMatrix::from_diagonal(5, 5, &sigma)).matmul(&v.transpose());
        let rep = rrqr_report(&householder_r(&m), &sigma).unwrap();
        assert!(rep.f_lower.iter().chain(&rep.f_upper).all(|&f| f >= 1.0 - 1e-10));
        // Sign flips on an SVD-ordered diagonal leave every factor at 1.
        let r = DenseMatrix::from_diagonal(5, 5, &[-5.0, 3.0, -2.0, 1.0, 0.5]);
        let rep = rrqr_report(&r, &sigma).unwrap();
        assert!(rep.f_lower.iter().chain(&rep.f_upper).all(|&f| (f - 1.0).abs() <= 1e-10));
    }

    #[test]
    fn maxnorm_factors_are_finite() {
        let m = gen_gaussian(60, 12, 4);
        let r = qrcp_maxnorm_r(&m, default_rank_tol(12)).r;
        let sigma = svd_values(&m).unwrap();
        let rep = rrqr_report(&r, &sigma).unwrap();
        assert!(rep.f_lower.iter().chain(&rep.f_upper).chain(&rep.g).all(|v| v.is_finite()));
    }

    #[test]
    fn singular_block_records_infinity() {
        let r = DenseMatrix::from_rows(&[[0.0, 1.0], [0.0, 1.0]]).unwrap();
        let rep = rrqr_report(&r, &[1.5, 0.0]).unwrap();
        assert_eq!(rep.g[0], f64::INFINITY);
    }

    #[test]
    fn budget_line() {
        assert_eq!(gu_eisenstat_f(0, 10), 1.0);
        assert_eq!(gu_eisenstat_f(2, 4), 17f64.sqrt());
        assert_eq!(gu_eisenstat_g(4), 4.0);
    }
}
