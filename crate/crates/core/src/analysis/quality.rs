//! Pivot-quality curves comparing a test factorization with a reference.

use crate::error::{Error, Result};
use crate::linalg::{householder_r, svd_values, DenseMatrix};
use crate::qrcp::{PivotedQR, PivotedR};

use super::rrqr::ratio;

/// The parts of a pivoted factorization the curves need.
#[derive(Clone, Copy, Debug)]
pub struct PivotedFactor<'a> {
    pub r: &'a DenseMatrix,
    pub pivots: &'a [usize],
}

impl<'a> From<&'a PivotedQR> for PivotedFactor<'a> {
    fn from(f: &'a PivotedQR) -> Self {
        Self { r: &f.r, pivots: &f.pivots }
    }
}

impl<'a> From<&'a PivotedR> for PivotedFactor<'a> {
    fn from(f: &'a PivotedR) -> Self {
        Self { r: &f.r, pivots: &f.pivots }
    }
}

/// Entry `k − 1` of every curve refers to step `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct PivotQualityCurves {
    /// `‖C_k^ref‖_F / ‖C_k^test‖_F` for `k = 1, …, n`; 1 where both vanish.
    pub trailing_ratio: Vec<f64>,
    /// `|R^ref[k, k]| / σ_k(M)` for `k = 1, …, n`.
    pub diag_ratio_ref: Vec<f64>,
    /// `|R^test[k, k]| / σ_k(M)`.
    pub diag_ratio_test: Vec<f64>,
}

impl PivotQualityCurves {
    /// Whether every trailing ratio lies in `[lo, hi]`.
    pub fn trailing_within(&self, lo: f64, hi: f64) -> bool {
        self.trailing_ratio.iter().all(|r| (lo..=hi).contains(r))
    }

    /// Largest pointwise factor between the two diagonal-ratio curves.
    pub fn diag_disagreement(&self) -> f64 {
        self.diag_ratio_ref
            .iter()
            .zip(&self.diag_ratio_test)
            .map(|(&a, &b)| {
                if a == b {
                    1.0
                } else {
                    ratio(a.max(b), a.min(b))
                }
            })
            .fold(1.0, f64::max)
    }
}

/// Full `n x n` triangular factor of `M[:, J]`. Truncated factors are
/// recomputed from the pivoted columns so the curves exist for every `k`.
fn full_factor(m: &DenseMatrix, f: PivotedFactor<'_>) -> Result<DenseMatrix> {
    let n = m.cols();
    if f.pivots.len() != n || f.r.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "factor has {} pivots and {} columns for {n} columns",
            f.pivots.len(),
            f.r.cols()
        )));
    }
    if f.r.rows() == n {
        Ok(f.r.clone())
    } else {
        Ok(householder_r(&m.select_cols(f.pivots)))
    }
}

/// `‖C_k‖_F` for `k = 0, …, n`, from suffix sums of squared row norms.
pub fn trailing_norms(r: &DenseMatrix) -> Vec<f64> {
    let (rows, n) = r.shape();
    let mut out = vec![0.0; n + 1];
    let mut mass = 0.0;
    for k in (0..n).rev() {
        if k < rows {
            mass += (k..n).map(|j| r[(k, j)] * r[(k, j)]).sum::<f64>();
        }
        out[k] = mass.sqrt();
    }
    out
}

/// Curves with the singular values of `M` computed here.
pub fn pivot_quality(m: &DenseMatrix, reference: PivotedFactor<'_>, test: PivotedFactor<'_>) -> Result<PivotQualityCurves> {
    let sigma = svd_values(m)?;
    pivot_quality_with_spectrum(m, reference, test, &sigma)
}

/// Curves against a known spectrum of `M` (descending, length `n`).
pub fn pivot_quality_with_spectrum(
    m: &DenseMatrix,
    reference: PivotedFactor<'_>,
    test: PivotedFactor<'_>,
    sigma: &[f64],
) -> Result<PivotQualityCurves> {
    let n = m.cols();
    if sigma.len() < n {
        return Err(Error::DimensionMismatch(format!(
            "need {n} singular values, got {}",
            sigma.len()
        )));
    }
    let r_ref = full_factor(m, reference)?;
    let r_test = full_factor(m, test)?;
    let t_ref = trailing_norms(&r_ref);
    let t_test = trailing_norms(&r_test);
    let trailing_ratio = (1..=n)
        .map(|k| {
            if t_ref[k] == t_test[k] {
                1.0
            } else {
                ratio(t_ref[k], t_test[k])
            }
        })
        .collect();
    let diag = |r: &DenseMatrix| -> Vec<f64> {
        (0..n)
            .map(|k| {
                let v = r[(k, k)].abs();
                if v == sigma[k] {
                    1.0
                } else {
                    ratio(v, sigma[k])
                }
            })
            .collect()
    };
    Ok(PivotQualityCurves {
        trailing_ratio,
        diag_ratio_ref: diag(&r_ref),
        diag_ratio_test: diag(&r_test),
    })
}
