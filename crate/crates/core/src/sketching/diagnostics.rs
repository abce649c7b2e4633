//! Distortion and restricted singular values of a sketch on a subspace.

use super::{range_basis, SketchOperator};
use crate::error::Result;
use crate::linalg::{svd_values, DenseMatrix};

/// Geometry of `S` restricted to `range(M)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceDiagnostics {
    /// `max(σ_max(SU) − 1, 1 − σ_min(SU))`, clamped to `[0, 1]`.
    pub distortion: f64,
    /// Smallest distortion over all rescalings `t·S`, `(κ − 1)/(κ + 1)`.
    pub effective_distortion: f64,
    /// `σ(SU)`, descending, one per basis vector (zero-padded when `d` is
    /// smaller than the dimension of the subspace).
    pub restricted_singular_values: Vec<f64>,
    /// `σ_max(SU)/σ_min(SU)`; infinite when `SU` is numerically singular.
    pub restricted_cond: f64,
}

impl SubspaceDiagnostics {
    /// Builds the record from the singular values of `SU`. `dim` is the
    /// larger dimension of `SU` and scales the singularity cutoff.
    pub fn from_singular_values(mut sigma: Vec<f64>, k: usize, dim: usize) -> Self {
        sigma.resize(k, 0.0);
        let smax = sigma.first().copied().unwrap_or(0.0);
        let smin = sigma.last().copied().unwrap_or(0.0);
        let distortion = (smax - 1.0).max(1.0 - smin).clamp(0.0, 1.0);
        let singular = smax == 0.0 || smin <= f64::EPSILON * smax * dim.max(1) as f64;
        let (restricted_cond, effective_distortion) = if singular {
            (f64::INFINITY, 1.0)
        } else {
            let kappa = smax / smin;
            (kappa, ((kappa - 1.0) / (kappa + 1.0)).clamp(0.0, 1.0))
        };
        Self {
            distortion,
            effective_distortion,
            restricted_singular_values: sigma,
            restricted_cond,
        }
    }
}

/// Distortion of `S` on `range(M)`, from the exact singular values of `S·U`.
pub fn diagnostics(s: &SketchOperator, m: &DenseMatrix) -> Result<SubspaceDiagnostics> {
    let u = range_basis(m)?;
    let su = s.apply(&u)?;
    let sigma = svd_values(&su)?;
    Ok(SubspaceDiagnostics::from_singular_values(
        sigma,
        u.cols(),
        su.rows().max(su.cols()),
    ))
}
