use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, trsm_right, upper_matmul, DenseMatrix, UNIT_ROUNDOFF};
use crate::qrcp::{default_rank_tol, qrcp_maxnorm_r, PivotedQR};
use crate::sketching::{diagnostics, SketchOperator};

use super::config::CqrrptConfig;
use super::flops::flop_model;
use super::rank::{rank_stage1, stage2_from_preconditioned, BoundKind, CondBound};

/// Wall time per phase. `cholqr` covers the Gram matrix, its Cholesky
/// factor, the rank search and forming `Q` and `R`. `total` excludes the
/// optional distortion measurement.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseTimings {
    pub sketch: Duration,
    pub qrcp: Duration,
    pub precondition: Duration,
    pub cholqr: Duration,
    pub total: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CqrrptDiagnostics {
    pub d: usize,
    /// Steps completed by the QRCP of the sketch.
    pub sketch_rank: usize,
    /// `(δ, δ_eff)` of the sketch on `range(M)`, when requested.
    pub distortion: Option<(f64, f64)>,
    pub cond_pre: CondBound,
    /// `‖C_k‖_F / ‖R^sk‖₂`, the relative tail of the sketch factor beyond `k`.
    pub truncation_ratio: f64,
    pub flops: f64,
    pub cholesky_failures: usize,
}

/// Result of a factorization. Equality ignores the timings.
#[derive(Clone, Debug)]
pub struct CqrrptOutput {
    /// `M[:, J[..k]] ≈ Q·R[:, ..k]`, `Q` is `m x k`, `R` is `k x n`.
    pub factorization: PivotedQR,
    pub k0: usize,
    pub k: usize,
    pub diagnostics: CqrrptDiagnostics,
    pub timings: PhaseTimings,
}

impl PartialEq for CqrrptOutput {
    fn eq(&self, other: &Self) -> bool {
        self.factorization == other.factorization
            && self.k0 == other.k0
            && self.k == other.k
            && self.diagnostics == other.diagnostics
    }
}

impl CqrrptOutput {
    /// Diagnostics as ordered `key, value` pairs. Timings are in seconds.
    pub fn record(&self) -> Vec<(&'static str, String)> {
        let d = &self.diagnostics;
        let t = &self.timings;
        let kind = match d.cond_pre.kind {
            BoundKind::Lower => "lower",
            BoundKind::Upper => "upper",
        };
        let mut out = vec![
            ("m", self.factorization.q.rows().to_string()),
            ("n", self.factorization.r.cols().to_string()),
            ("d", d.d.to_string()),
            ("sketch_rank", d.sketch_rank.to_string()),
            ("k0", self.k0.to_string()),
            ("k", self.k.to_string()),
            ("cond_pre", format!("{:e}", d.cond_pre.value)),
            ("cond_pre_bound", kind.to_string()),
            ("truncation_ratio", format!("{:e}", d.truncation_ratio)),
            ("flops", format!("{:e}", d.flops)),
            ("cholesky_failures", d.cholesky_failures.to_string()),
        ];
        if let Some((delta, eff)) = d.distortion {
            out.push(("distortion", format!("{delta:e}")));
            out.push(("effective_distortion", format!("{eff:e}")));
        }
        for (key, v) in [
            ("time_sketch", t.sketch),
            ("time_qrcp", t.qrcp),
            ("time_precondition", t.precondition),
            ("time_cholqr", t.cholqr),
            ("time_total", t.total),
        ] {
            out.push((key, format!("{:e}", v.as_secs_f64())));
        }
        out
    }
}

/// Sketch factorization and the preconditioned block, before stage two.
#[derive(Clone, Debug, PartialEq)]
pub struct Preconditioned {
    /// `k₀ x n` leading rows of the sketch's triangular factor.
    pub r_sk: DenseMatrix,
    pub pivots: Vec<usize>,
    pub sketch_rank: usize,
    pub k0: usize,
    /// `M[:, J[..k₀]] · R^sk[..k₀, ..k₀]⁻¹`.
    pub m_pre: DenseMatrix,
    /// Full (untruncated rows) sketch factor, kept for the truncation ratio.
    r_sk_full: DenseMatrix,
}

fn check_sketch(m: &DenseMatrix, s: &SketchOperator) -> Result<()> {
    if s.m() != m.rows() {
        return Err(Error::DimensionMismatch(format!(
            "sketch has {} columns, M has {} rows",
            s.m(),
            m.rows()
        )));
    }
    Ok(())
}

fn sketch_and_pivot(
    m: &DenseMatrix,
    s: &SketchOperator,
    cfg: &CqrrptConfig,
    timings: &mut PhaseTimings,
) -> Result<Preconditioned> {
    let t = Instant::now();
    let m_sk = s.apply(m)?;
    timings.sketch = t.elapsed();

    let t = Instant::now();
    let sk = qrcp_maxnorm_r(&m_sk, cfg.rank_tol.unwrap_or_else(|| default_rank_tol(m.cols())));
    let k0 = if cfg.stage1_enabled {
        rank_stage1(&sk.r, UNIT_ROUNDOFF).min(sk.rank)
    } else {
        sk.rank
    };
    timings.qrcp = t.elapsed();

    let t = Instant::now();
    let a_sk = sk.r.submatrix(0..k0, 0..k0);
    let m_pre = trsm_right(&m.select_cols(&sk.pivots[..k0]), &a_sk)?;
    timings.precondition = t.elapsed();

    Ok(Preconditioned {
        r_sk: sk.r.submatrix(0..k0, 0..m.cols()),
        pivots: sk.pivots,
        sketch_rank: sk.rank,
        k0,
        m_pre,
        r_sk_full: sk.r,
    })
}

/// Sketches `M`, pivots on the sketch, picks `k₀` and preconditions the
/// leading `k₀` pivot columns. This is everything before stage two.
pub fn precondition(m: &DenseMatrix, s: &SketchOperator, cfg: &CqrrptConfig) -> Result<Preconditioned> {
    cfg.validate()?;
    check_sketch(m, s)?;
    sketch_and_pivot(m, s, cfg, &mut PhaseTimings::default())
}

/// `‖R[k.., k..]‖_F / ‖R‖₂`.
fn truncation_ratio(r: &DenseMatrix, k: usize) -> f64 {
    let (rows, n) = r.shape();
    if rows == 0 {
        return 0.0;
    }
    let tail = if k >= rows {
        0.0
    } else {
        r.submatrix(k..rows, k..n).frobenius_norm()
    };
    let top = spectral_norm(r).value;
    if top == 0.0 {
        0.0
    } else {
        tail / top
    }
}

/// CQRRPT with a given sketching operator.
///
/// Returns `M[:, J] ≈ Q·R` with `Q` explicit and `k` columns. `k = 0` means
/// `M` was numerically zero.
pub fn cqrrpt_core(m: &DenseMatrix, s: &SketchOperator, cfg: &CqrrptConfig) -> Result<CqrrptOutput> {
    cfg.validate()?;
    check_sketch(m, s)?;
    let start = Instant::now();
    let (rows, n) = m.shape();
    let mut timings = PhaseTimings::default();
    let pre = sketch_and_pivot(m, s, cfg, &mut timings)?;

    let t = Instant::now();
    let (k, q, r, cond_pre, failures) = if pre.k0 == 0 {
        let one = CondBound { value: 1.0, kind: BoundKind::Upper };
        (0, DenseMatrix::zeros(rows, 0), DenseMatrix::zeros(0, n), one, 0)
    } else {
        let st = stage2_from_preconditioned(pre.m_pre, cfg.eps_tol, UNIT_ROUNDOFF, cfg.cond_method)?;
        let k = st.k;
        let q = trsm_right(&st.m_pre.leading_cols(k), &st.r_pre)?;
        let r = upper_matmul(&st.r_pre, &pre.r_sk.submatrix(0..k, 0..n));
        (k, q, r, st.cond_pre, st.cholesky_failures)
    };
    let truncation = truncation_ratio(&pre.r_sk_full, k);
    timings.cholqr = t.elapsed();
    timings.total = start.elapsed();

    let distortion = if cfg.measure_distortion {
        let dg = diagnostics(s, m)?;
        Some((dg.distortion, dg.effective_distortion))
    } else {
        None
    };
    let d = s.d();
    let diagnostics = CqrrptDiagnostics {
        d,
        sketch_rank: pre.sketch_rank,
        distortion,
        cond_pre,
        truncation_ratio: truncation,
        flops: flop_model(rows, n, k.min(d), d, s.apply_cost(n))?,
        cholesky_failures: failures,
    };
    Ok(CqrrptOutput {
        factorization: PivotedQR { q, r, pivots: pre.pivots, rank: k },
        k0: pre.k0,
        k,
        diagnostics,
        timings,
    })
}

/// CQRRPT with a freshly sampled sketch of size `d = ⌈γ·n⌉`.
pub fn cqrrpt(m: &DenseMatrix, cfg: &CqrrptConfig) -> Result<CqrrptOutput> {
    cfg.validate()?;
    let d = cfg.sketch_dim(m.cols());
    let s = SketchOperator::sample(cfg.family_for(d), d, m.rows(), cfg.seed)?;
    cqrrpt_core(m, &s, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qrcp::validate;
    use crate::sketching::SketchFamily;
    use crate::testmat::{gen_exact_rank, gen_gaussian};

    fn gaussian_cfg() -> CqrrptConfig {
        CqrrptConfig { family: SketchFamily::Gaussian, ..Default::default() }
    }

    #[test]
    fn full_rank_gaussian_sketch() {
        let m = gen_gaussian(1000, 100, 1);
        let s = SketchOperator::sample(SketchFamily::Gaussian, 125, 1000, 2).unwrap();
        let out = cqrrpt_core(&m, &s, &gaussian_cfg()).unwrap();
        assert_eq!(out.k, 100);
        let rep = validate(&out.factorization, &m, 1e-13).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn scaled_identity_columns() {
        let c = 3.5;
        let m = DenseMatrix::from_fn(60, 8, |i, j| if i == j { c } else { 0.0 });
        let out = cqrrpt(&m, &gaussian_cfg()).unwrap();
        assert_eq!(out.k, 8);
        let r = &out.factorization.r;
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { c } else { 0.0 };
                assert!((r[(i, j)].abs() - want).abs() <= 1e-13 * c);
            }
        }
    }

    #[test]
    fn exact_rank_detected() {
        let m = gen_exact_rank(200, 40, 10, 4);
        let out = cqrrpt(&m, &CqrrptConfig { seed: 5, ..Default::default() }).unwrap();
        assert_eq!(out.k, 10);
        let f = &out.factorization;
        let resid = m.select_cols(&f.pivots).sub(&f.q.matmul(&f.r)).frobenius_norm();
        assert!(resid <= 1e-12 * m.frobenius_norm());
    }

    #[test]
    fn loose_identity_bound_does_not_truncate() {
        // Sketches whose identity-deviation bound exceeds the threshold even
        // though the preconditioned block is well conditioned.
        for seed in 0..40 {
            let m = gen_exact_rank(512, 64, 17, seed);
            let out = cqrrpt(&m, &CqrrptConfig { seed: 1000 + seed, ..Default::default() }).unwrap();
            assert_eq!(out.k, 17, "seed {seed}");
        }
    }

    #[test]
    fn zero_matrix_gives_rank_zero() {
        let out = cqrrpt(&DenseMatrix::zeros(30, 5), &CqrrptConfig::default()).unwrap();
        assert_eq!((out.k, out.k0), (0, 0));
        assert_eq!(out.factorization.q.shape(), (30, 0));
    }

    #[test]
    fn default_sketch_size() {
        let out = cqrrpt(&gen_gaussian(500, 50, 3), &CqrrptConfig::default()).unwrap();
        assert_eq!(out.diagnostics.d, 63);
    }

    #[test]
    fn deterministic() {
        let m = gen_gaussian(300, 30, 8);
        let cfg = CqrrptConfig { seed: 11, measure_distortion: true, ..Default::default() };
        let a = cqrrpt(&m, &cfg).unwrap();
        let b = cqrrpt(&m, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.record().iter().any(|(k, _)| *k == "effective_distortion"));
    }

    #[test]
    fn mismatched_sketch_rejected() {
        let s = SketchOperator::sample(SketchFamily::Gaussian, 10, 20, 1).unwrap();
        assert!(cqrrpt_core(&gen_gaussian(30, 5, 1), &s, &CqrrptConfig::default()).is_err());
    }
}
