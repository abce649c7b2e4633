//! The acceptance suite: twelve numbered checks, each printing one line.

use std::fmt;
use std::time::{Duration, Instant};

use anyhow::{bail, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cqrrpt::analysis::{
    inheritance_check, maxnorm_similarity_check, pivot_quality_with_spectrum, PivotQualityCurves,
};
use cqrrpt::cqrrpt::{
    cholesky_qr, cqrrpt, cqrrpt_core, flop_model, flop_model_sixths, precondition, CqrrptConfig,
};
use cqrrpt::linalg::{householder_qr, orthogonality_loss, svd_values};
use cqrrpt::qrcp::{default_rank_tol, qrcp_gram_schmidt, qrcp_maxnorm, qrcp_maxnorm_r, validate, PivotedR};
use cqrrpt::sketching::{diagnostics, leverage_scores, SketchFamily, SketchOperator, SubspaceDiagnostics};
use cqrrpt::testmat::{
    gen_exact_rank, gen_gaussian, gen_high_coherence, gen_spectral, high_coherence_spectrum,
    SpectrumSpec, HIGH_COHERENCE_SCALE,
};
use cqrrpt::DenseMatrix;

/// Whole-suite wall-time budget.
pub const SUITE_BUDGET: Duration = Duration::from_secs(120);

/// Seed and trial-count overrides shared by every check.
#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Replaces every check's default trial count.
    pub trials: Option<usize>,
}

impl VerifyOptions {
    fn trials(&self, default: usize) -> usize {
        self.trials.unwrap_or(default).max(1)
    }

    /// Distinct, reproducible seed for trial `t` of check `id`.
    fn seed(&self, id: usize, t: usize) -> u64 {
        self.seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add((id as u64) << 32)
            .wrapping_add(t as u64)
    }
}

/// Smallest count out of `trials` meeting the fraction `num/den`.
fn required(trials: usize, num: usize, den: usize) -> usize {
    (trials * num).div_ceil(den)
}

/// `slack` is the margin to the threshold: non-negative when the check passes.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub pass: bool,
    pub slack: f64,
    pub detail: String,
}

pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    run: fn(&VerifyOptions) -> Result<Outcome>,
}

pub const CRITERIA: [Criterion; 12] = [
    Criterion { id: 1, name: "correctness", run: correctness },
    Criterion { id: 2, name: "spectrum-map", run: spectrum_map },
    Criterion { id: 3, name: "preconditioner-cond", run: preconditioner_cond },
    Criterion { id: 4, name: "stability-split", run: stability_split },
    Criterion { id: 5, name: "rank-detection", run: rank_detection },
    Criterion { id: 6, name: "pivot-quality-low-coherence", run: pivot_quality_low },
    Criterion { id: 7, name: "pivot-quality-high-coherence", run: pivot_quality_high },
    Criterion { id: 8, name: "rrqr-inheritance", run: rrqr_inheritance },
    Criterion { id: 9, name: "maxnorm-similarity", run: maxnorm_similarity },
    Criterion { id: 10, name: "pivot-rule-equivalence", run: pivot_rule_equivalence },
    Criterion { id: 11, name: "flop-model", run: flop_model_check },
    Criterion { id: 12, name: "sketch-structure", run: sketch_structure },
];

/// Resolves `--only` (a number or a name); all checks when `None`.
pub fn select(only: Option<&str>) -> Result<Vec<&'static Criterion>> {
    let Some(key) = only else {
        return Ok(CRITERIA.iter().collect());
    };
    let hit = CRITERIA
        .iter()
        .find(|c| key.parse::<usize>().ok() == Some(c.id) || key == c.name);
    match hit {
        Some(c) => Ok(vec![c]),
        None => bail!(
            "unknown check {key:?}; expected 1-12 or one of: {}",
            CRITERIA.iter().map(|c| c.name).collect::<Vec<_>>().join(", ")
        ),
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub id: usize,
    pub name: &'static str,
    pub outcome: Outcome,
    pub elapsed: Duration,
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:>2} {:<30} slack={:+.3e} {} ({:.2}s)",
            if self.outcome.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.outcome.slack,
            self.outcome.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

/// Runs one check; an internal error counts as a failure.
pub fn run_one(c: &Criterion, opts: &VerifyOptions) -> Report {
    let start = Instant::now();
    let outcome = (c.run)(opts).unwrap_or_else(|e| Outcome {
        pass: false,
        slack: f64::NEG_INFINITY,
        detail: format!("error: {e:#}"),
    });
    Report { id: c.id, name: c.name, outcome, elapsed: start.elapsed() }
}

fn gaussian_config(seed: u64) -> CqrrptConfig {
    CqrrptConfig { family: SketchFamily::Gaussian, seed, ..Default::default() }
}

fn correctness(o: &VerifyOptions) -> Result<Outcome> {
    const TOL: f64 = 1e-13;
    const BUDGET: f64 = 5.0;
    let start = Instant::now();
    let trials = o.trials(20);
    let (mut worst, mut bad) = (0.0f64, 0);
    for t in 0..trials {
        let m = gen_gaussian(1000, 100, o.seed(1, t));
        let s = SketchOperator::sample(SketchFamily::Gaussian, 125, 1000, o.seed(1, 1000 + t))?;
        let out = cqrrpt_core(&m, &s, &gaussian_config(0))?;
        let rep = validate(&out.factorization, &m, TOL)?;
        worst = worst.max(rep.orthogonality_loss).max(rep.reconstruction_error);
        if !rep.pass || out.k != 100 {
            bad += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome {
        pass: bad == 0 && secs < BUDGET,
        slack: TOL - worst,
        detail: format!("{}/{trials} valid, worst error {worst:.2e}, {secs:.2}s of {BUDGET}s", trials - bad),
    })
}

fn spectrum_map(o: &VerifyOptions) -> Result<Outcome> {
    const TOL: f64 = 1e-9;
    let (rows, n) = (500, 40);
    let mut worst = 0.0f64;
    let trials = o.trials(20);
    for t in 0..trials {
        let m = gen_gaussian(rows, n, o.seed(2, t));
        let cfg = CqrrptConfig { seed: o.seed(2, 1000 + t), ..Default::default() };
        let d = cfg.sketch_dim(n);
        let s = SketchOperator::sample(cfg.family_for(d), d, rows, cfg.seed)?;
        let pre = precondition(&m, &s, &cfg)?;
        if pre.k0 != n {
            bail!("trial {t}: stage one kept {} of {n} columns", pre.k0);
        }
        let sig_pre = svd_values(&pre.m_pre)?;
        let sig_su = diagnostics(&s, &m)?.restricted_singular_values;
        for i in 0..n {
            worst = worst.max((sig_pre[i] * sig_su[n - 1 - i] - 1.0).abs());
        }
    }
    Ok(Outcome {
        pass: worst <= TOL,
        slack: TOL - worst,
        detail: format!("max |σ_i(M_pre)·σ_(k-i+1)(SU) - 1| = {worst:.2e} over {trials} trials"),
    })
}

/// Per-batch tallies for the preconditioner check.
#[derive(Default)]
struct CondBatch {
    qualifying: usize,
    worst_qualifying: f64,
    worst_mismatch: f64,
}

fn cond_batch(o: &VerifyOptions, rows: usize, n: usize, d: usize, trials: usize, tag: usize) -> Result<CondBatch> {
    let mut b = CondBatch::default();
    for t in 0..trials {
        let m = gen_gaussian(rows, n, o.seed(3, tag + t));
        let s = SketchOperator::sample(SketchFamily::Gaussian, d, rows, o.seed(3, tag + 5000 + t))?;
        // Distortion through a Householder basis, independent of the SVD route.
        let u = householder_qr(&m)?.0;
        let sv = svd_values(&s.apply(&u)?)?;
        let geo = SubspaceDiagnostics::from_singular_values(sv, n, d);
        let pre = precondition(&m, &s, &gaussian_config(0))?;
        let sig = svd_values(&pre.m_pre)?;
        let cond = sig[0] / sig[sig.len() - 1];
        b.worst_mismatch = b.worst_mismatch.max((cond / geo.restricted_cond - 1.0).abs());
        if geo.distortion <= 0.25 {
            b.qualifying += 1;
            b.worst_qualifying = b.worst_qualifying.max(cond);
        }
    }
    Ok(b)
}

fn preconditioner_cond(o: &VerifyOptions) -> Result<Outcome> {
    const LIMIT: f64 = 1.8;
    let trials = o.trials(100);
    // The prescribed batch: γ = 2 Gaussian sketches.
    let a = cond_batch(o, 1000, 50, 100, trials, 0)?;
    // A batch large enough for δ ≤ 1/4 to occur.
    let b = cond_batch(o, 2000, 20, 640, trials, 10_000)?;
    let worst = a.worst_qualifying.max(b.worst_qualifying);
    let mismatch = a.worst_mismatch.max(b.worst_mismatch);
    Ok(Outcome {
        pass: worst <= LIMIT && b.qualifying > 0 && mismatch <= 1e-9,
        slack: LIMIT - worst,
        detail: format!(
            "gamma=2: {}/{trials} with δ≤1/4; gamma=32: {}/{trials} with δ≤1/4; \
             max cond(M_pre) {worst:.3}; |cond/κ(SU) - 1| ≤ {mismatch:.1e}",
            a.qualifying, b.qualifying
        ),
    })
}

fn stability_split(o: &VerifyOptions) -> Result<Outcome> {
    const TOL: f64 = 1e-12;
    const BUDGET: f64 = 10.0;
    let start = Instant::now();
    let m = gen_spectral(4096, 256, &SpectrumSpec::PolynomialDecay { cond: 1e10 }, o.seed(4, 0))?;
    let (chol_ok, chol_desc) = match cholesky_qr(&m) {
        Err(e) => (true, format!("cholesky_qr failed ({e})")),
        Ok((q, _)) => {
            let loss = orthogonality_loss(&q)?;
            (loss >= 1e-3, format!("cholesky_qr loss {loss:.2e}"))
        }
    };
    let out = cqrrpt(&m, &CqrrptConfig { seed: o.seed(4, 1), ..Default::default() })?;
    let rep = validate(&out.factorization, &m, TOL)?;
    let secs = start.elapsed().as_secs_f64();
    let worst = rep.orthogonality_loss.max(rep.reconstruction_error);
    Ok(Outcome {
        pass: chol_ok && rep.pass && secs < BUDGET,
        slack: TOL - worst,
        detail: format!(
            "{chol_desc}; cqrrpt k={} loss {:.2e} reconstruction {:.2e}; {secs:.2}s of {BUDGET}s",
            out.k, rep.orthogonality_loss, rep.reconstruction_error
        ),
    })
}

fn rank_detection(o: &VerifyOptions) -> Result<Outcome> {
    const TOL: f64 = 1e-12;
    let trials = o.trials(20);
    let (mut hits, mut worst) = (0, 0.0f64);
    for t in 0..trials {
        let m = gen_exact_rank(512, 64, 17, o.seed(5, t));
        let out = cqrrpt(&m, &CqrrptConfig { seed: o.seed(5, 1000 + t), ..Default::default() })?;
        let rep = validate(&out.factorization, &m, TOL)?;
        worst = worst.max(rep.reconstruction_error);
        if out.k == 17 && rep.reconstruction_error <= TOL {
            hits += 1;
        }
    }
    Ok(Outcome {
        pass: hits == trials,
        slack: TOL - worst,
        detail: format!("k = 17 in {hits}/{trials}, worst reconstruction {worst:.2e}"),
    })
}

/// One cqrrpt run scored against a reference factorization.
fn score(m: &DenseMatrix, reference: &PivotedR, sigma: &[f64], cfg: &CqrrptConfig) -> Result<PivotQualityCurves> {
    let out = cqrrpt(m, cfg)?;
    Ok(pivot_quality_with_spectrum(m, reference.into(), (&out.factorization).into(), sigma)?)
}

fn saso(gamma: f64, nnz: usize, seed: u64) -> CqrrptConfig {
    CqrrptConfig { gamma, family: SketchFamily::Saso { nnz_per_col: nnz }, seed, ..Default::default() }
}

fn pivot_quality_low(o: &VerifyOptions) -> Result<Outcome> {
    let (rows, n) = (8192, 256);
    let trials = o.trials(20);
    let need = required(trials, 18, 20);
    let mut pass = true;
    let mut slack = f64::INFINITY;
    let mut parts = Vec::new();
    for (i, (label, spec)) in [
        ("staircase", SpectrumSpec::staircase()),
        ("decay", SpectrumSpec::PolynomialDecay { cond: 1e10 }),
    ]
    .into_iter()
    .enumerate()
    {
        // One matrix per profile; the trials vary the sketch.
        let m = gen_spectral(rows, n, &spec, o.seed(6, 100 * i))?;
        let sigma = spec.values(n)?;
        let reference = qrcp_maxnorm_r(&m, default_rank_tol(n));
        let (mut inside, mut worst_diag) = (0, 1.0f64);
        for t in 0..trials {
            let c = score(&m, &reference, &sigma, &saso(1.0, 1, o.seed(6, 100 * i + 1 + t)))?;
            if c.trailing_within(0.5, 2.0) {
                inside += 1;
            }
            worst_diag = worst_diag.max(c.diag_disagreement());
        }
        pass &= inside >= need && worst_diag <= 4.0;
        slack = slack.min((inside as f64 - need as f64).min(4.0 - worst_diag));
        parts.push(format!("{label}: {inside}/{trials} within [0.5, 2], diag factor ≤ {worst_diag:.3}"));
    }
    Ok(Outcome { pass, slack, detail: format!("{} (need {need})", parts.join("; ")) })
}

fn pivot_quality_high(o: &VerifyOptions) -> Result<Outcome> {
    let (rows, n) = (8192, 256);
    let trials = o.trials(20);
    let (need_good, need_bad) = (required(trials, 18, 20), required(trials, 10, 20));
    let (mut good, mut bad) = (0, 0);
    for t in 0..trials {
        let seed = o.seed(7, t);
        let m = gen_high_coherence(rows, n, HIGH_COHERENCE_SCALE, seed)?;
        let sigma = high_coherence_spectrum(rows, n, HIGH_COHERENCE_SCALE, seed)?;
        let reference = qrcp_maxnorm_r(&m, default_rank_tol(n));
        if score(&m, &reference, &sigma, &saso(3.0, 4, o.seed(7, 1000 + t)))?.trailing_within(0.5, 2.0) {
            good += 1;
        }
        if !score(&m, &reference, &sigma, &saso(1.0, 1, o.seed(7, 2000 + t)))?.trailing_within(0.5, 2.0) {
            bad += 1;
        }
    }
    Ok(Outcome {
        pass: good >= need_good && bad >= need_bad,
        slack: (good as f64 - need_good as f64).min(bad as f64 - need_bad as f64),
        detail: format!(
            "gamma=3 nnz=4: {good}/{trials} within [0.5, 2] (need {need_good}); \
             gamma=1 nnz=1: {bad}/{trials} leave it (need {need_bad})"
        ),
    })
}

fn rrqr_inheritance(o: &VerifyOptions) -> Result<Outcome> {
    let trials = o.trials(200);
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed(8, usize::MAX >> 33));
    let (mut held, mut slack) = (0, f64::INFINITY);
    for t in 0..trials {
        let m = gen_exact_rank(12, 8, 5, o.seed(8, t));
        let s = SketchOperator::sample(SketchFamily::Gaussian, 8, 12, o.seed(8, 1000 + t))?;
        let mut j: Vec<usize> = (0..8).collect();
        j.shuffle(&mut rng);
        let rep = inheritance_check(&m, &s, &j)?;
        if rep.all_hold() {
            held += 1;
        }
        for v in rep.slack_leading.iter().chain(&rep.slack_trailing).chain(&rep.slack_interp) {
            slack = slack.min(*v);
        }
    }
    Ok(Outcome {
        pass: held == trials,
        slack,
        detail: format!("all three bounds hold in {held}/{trials} instances"),
    })
}

fn maxnorm_similarity(o: &VerifyOptions) -> Result<Outcome> {
    let trials = o.trials(100);
    let (mut held, mut slack_sigma, mut slack_delta) = (0, f64::INFINITY, f64::INFINITY);
    for t in 0..trials {
        let m = gen_gaussian(50, 20, o.seed(9, t));
        let s = SketchOperator::sample(SketchFamily::Gaussian, 22, 50, o.seed(9, 1000 + t))?;
        let mut all = true;
        for ell in 0..=10 {
            let rep = maxnorm_similarity_check(&m, &s, ell)?;
            all &= rep.holds();
            slack_sigma = slack_sigma.min(rep.slack_sigma);
            slack_delta = slack_delta.min(rep.slack_delta);
        }
        held += usize::from(all);
    }
    Ok(Outcome {
        pass: held == trials,
        slack: slack_sigma.min(slack_delta),
        detail: format!(
            "both bounds hold in {held}/{trials} instances (ℓ = 0..10); \
             min slack σ-bound {slack_sigma:.2e}, δ-bound {slack_delta:.2e}"
        ),
    })
}

fn pivot_rule_equivalence(o: &VerifyOptions) -> Result<Outcome> {
    let trials = o.trials(100);
    let n = 30;
    let mut same = 0;
    for t in 0..trials {
        let mut m = gen_gaussian(100, n, o.seed(10, t));
        // Column norms a factor of two apart, in random order.
        let mut order: Vec<i32> = (0..n as i32).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(o.seed(10, 1000 + t)));
        for (j, &e) in order.iter().enumerate() {
            let scale = 2f64.powi(e);
            m.col_mut(j).iter_mut().for_each(|v| *v *= scale);
        }
        let tol = default_rank_tol(n);
        if qrcp_maxnorm(&m, tol).pivots == qrcp_gram_schmidt(&m, tol).pivots {
            same += 1;
        }
    }
    Ok(Outcome {
        pass: same == trials,
        slack: same as f64 - trials as f64,
        detail: format!("identical pivots in {same}/{trials}"),
    })
}

/// Six times the per-step costs, summed by hand: QRCP of the sketch,
/// the preconditioning solve, then CholeskyQR.
fn hand_sixths(m: i128, n: i128, k: i128, d: i128) -> i128 {
    let qrcp = 24 * d * n * k - 12 * k * k * (d + n) + 8 * k * k * k;
    let trsm = 6 * m * k * k;
    let cholqr = 6 * m * k * (k + 1) + 2 * k * k * k + 3 * k * k + k + 6 * m * k * k;
    qrcp + trsm + cholqr
}

fn flop_model_check(o: &VerifyOptions) -> Result<Outcome> {
    let trials = o.trials(10);
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed(11, 0));
    let mut exact = 0;
    for _ in 0..trials {
        let n: u64 = rng.random_range(1..=4000);
        let d: u64 = rng.random_range(n..=4 * n);
        let k: u64 = rng.random_range(0..=n);
        let m: u64 = rng.random_range(d..=10_000_000);
        let c_sk: f64 = rng.random_range(0.0..1e6);
        let hand = hand_sixths(m as i128, n as i128, k as i128, d as i128);
        let model = flop_model(m as usize, n as usize, k as usize, d as usize, c_sk)?;
        if flop_model_sixths(m, n, k, d) == hand && model == hand as f64 / 6.0 + c_sk {
            exact += 1;
        }
    }
    let (m, n) = (1_000_000usize, 500usize);
    let lead = flop_model(m, n, n, 625, 0.0)? / (m as f64 * (n * n) as f64);
    let rel = (lead / 3.0 - 1.0).abs();
    Ok(Outcome {
        pass: exact == trials && rel <= 0.01,
        slack: 0.01 - rel,
        detail: format!("{exact}/{trials} tuples exact; flops/(mn²) = {lead:.5} at m = 1e6"),
    })
}

fn sketch_structure(o: &VerifyOptions) -> Result<Outcome> {
    let mut failures: Vec<String> = Vec::new();

    let (d, m_dim, nnz) = (40, 300, 4);
    let s = SketchOperator::sample(SketchFamily::Saso { nnz_per_col: nnz }, d, m_dim, o.seed(12, 0))?;
    let v = 1.0 / (d as f64).sqrt();
    for i in 0..m_dim {
        let col = s.saso_column(i).unwrap_or_default();
        let mut rows: Vec<usize> = col.iter().map(|e| e.0).collect();
        rows.sort_unstable();
        rows.dedup();
        let values_ok = col.iter().all(|e| e.1.to_bits() == v.to_bits() || e.1.to_bits() == (-v).to_bits());
        if col.len() != nnz || rows.len() != nnz || !values_ok || rows.iter().any(|&r| r >= d) {
            failures.push(format!("SASO column {i}"));
            break;
        }
    }

    let (m_srft, d_srft) = (1024, 100);
    let srft = SketchOperator::sample(SketchFamily::Srft, d_srft, m_srft, o.seed(12, 1))?.to_dense();
    let gram = srft.matmul(&srft.transpose());
    let target = m_srft as f64 / d_srft as f64;
    let srft_err = DenseMatrix::from_fn(d_srft, d_srft, |i, j| {
        gram[(i, j)] - if i == j { target } else { 0.0 }
    })
    .max_abs();
    if srft_err > 1e-12 {
        failures.push(format!("SRFT S·Sᵀ off by {srft_err:.2e}"));
    }

    let n = 20;
    let lev_sum: f64 = leverage_scores(&gen_gaussian(1000, n, o.seed(12, 2)))?.iter().sum();
    let lev_err = (lev_sum - n as f64).abs();
    if lev_err > 1e-10 {
        failures.push(format!("leverage scores sum to {lev_sum}"));
    }

    let mat = gen_gaussian(256, 24, o.seed(12, 3));
    for family in [SketchFamily::Gaussian, SketchFamily::Saso { nnz_per_col: 3 }, SketchFamily::Srft] {
        let seed = o.seed(12, 4);
        let a = SketchOperator::sample(family, 30, 256, seed)?;
        let b = SketchOperator::sample(family, 30, 256, seed)?;
        let bytes_ok = a.to_bytes() == b.to_bytes() && SketchOperator::from_bytes(&a.to_bytes())? == a;
        let apply_ok = a.apply(&mat)?.data() == b.apply(&mat)?.data();
        let cfg = CqrrptConfig { family, seed, ..Default::default() };
        let out_ok = cqrrpt(&mat, &cfg)? == cqrrpt(&mat, &cfg)?;
        if a != b || !bytes_ok || !apply_ok || !out_ok {
            failures.push(format!("{} not deterministic", family.name()));
        }
    }

    Ok(Outcome {
        pass: failures.is_empty(),
        slack: (1e-12 - srft_err).min(1e-10 - lev_err),
        detail: if failures.is_empty() {
            format!("SASO exact; SRFT error {srft_err:.1e}; leverage error {lev_err:.1e}; deterministic")
        } else {
            failures.join("; ")
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn select_by_number_and_name() {
        assert_eq!(select(Some("7")).unwrap()[0].name, "pivot-quality-high-coherence");
        assert_eq!(select(Some("flop-model")).unwrap()[0].id, 11);
        assert_eq!(select(None).unwrap().len(), 12);
        assert!(select(Some("13")).is_err());
    }

    #[test]
    fn required_counts_scale() {
        assert_eq!(required(20, 18, 20), 18);
        assert_eq!(required(100, 18, 20), 90);
        assert_eq!(required(3, 10, 20), 2);
    }

    #[test]
    fn hand_count_matches_closed_form() {
        for (m, n, k, d) in [(1000, 100, 100, 125), (50, 7, 3, 9), (1, 1, 0, 1)] {
            assert_eq!(hand_sixths(m, n, k, d), flop_model_sixths(m as u64, n as u64, k as u64, d as u64));
        }
    }
}
