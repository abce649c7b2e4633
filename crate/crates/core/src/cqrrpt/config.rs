use crate::error::{Error, Result};
use crate::linalg::UNIT_ROUNDOFF;
use crate::sketching::SketchFamily;

use super::rank::CondMethod;

pub const DEFAULT_GAMMA: f64 = 1.25;

/// Default orthogonality-loss tolerance, `10⁴·u`. Stage two accepts blocks
/// with estimated condition number up to `√(ε_tol/u) = 100`.
pub const DEFAULT_EPS_TOL: f64 = 1e4 * UNIT_ROUNDOFF;

/// Tuning knobs of a factorization.
#[derive(Clone, Debug, PartialEq)]
pub struct CqrrptConfig {
    /// Sketch size ratio, `d = ⌈γ·n⌉`.
    pub gamma: f64,
    pub family: SketchFamily,
    pub eps_tol: f64,
    pub cond_method: CondMethod,
    /// When off, `k₀` is the number of steps the sketch QRCP completed.
    pub stage1_enabled: bool,
    pub seed: u64,
    /// Relative stopping tolerance of the sketch QRCP, `n·u` when `None`.
    pub rank_tol: Option<f64>,
    /// Measure the distortion of the sketch on `range(M)` (costs an SVD of `M`).
    pub measure_distortion: bool,
}

impl Default for CqrrptConfig {
    fn default() -> Self {
        Self {
            gamma: DEFAULT_GAMMA,
            family: SketchFamily::default(),
            eps_tol: DEFAULT_EPS_TOL,
            cond_method: CondMethod::default(),
            stage1_enabled: true,
            seed: 0,
            rank_tol: None,
            measure_distortion: false,
        }
    }
}

impl CqrrptConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma >= 1.0) {
            return Err(Error::InvalidArgument(format!("gamma must be >= 1, got {}", self.gamma)));
        }
        if !(self.eps_tol.is_finite() && self.eps_tol > UNIT_ROUNDOFF) {
            return Err(Error::InvalidArgument(format!(
                "eps_tol must exceed the unit roundoff, got {}",
                self.eps_tol
            )));
        }
        if let Some(t) = self.rank_tol {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::InvalidArgument(format!("rank_tol must be >= 0, got {t}")));
            }
        }
        Ok(())
    }

    /// `⌈γ·n⌉`, at least 1. Products within a relative `1e-9` of an integer
    /// are rounded to it so that e.g. `1.1·10` gives 11.
    pub fn sketch_dim(&self, n: usize) -> usize {
        let x = self.gamma * n as f64;
        let r = x.round();
        let d = if (x - r).abs() <= 1e-9 * x { r } else { x.ceil() };
        (d as usize).max(1)
    }

    /// The configured family with the SASO column count clamped to `d`.
    pub fn family_for(&self, d: usize) -> SketchFamily {
        match self.family {
            SketchFamily::Saso { nnz_per_col } => SketchFamily::Saso {
                nnz_per_col: nnz_per_col.min(d),
            },
            f => f,
        }
    }
}
