use cqrrpt::analysis::trailing_norms;
use cqrrpt::cqrrpt::{cqrrpt, cqrrpt_core, precondition, CqrrptConfig};
use cqrrpt::linalg::{orthogonality_loss, svd_values, UNIT_ROUNDOFF};
use cqrrpt::qrcp::{qrcp_maxnorm_r, validate};
use cqrrpt::sketching::{diagnostics, SketchFamily, SketchOperator};
use cqrrpt::testmat::{gen_exact_rank, gen_gaussian, gen_spectral, SpectrumSpec};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = SketchFamily> {
    prop_oneof![
        Just(SketchFamily::Gaussian),
        (1usize..=4).prop_map(|nnz| SketchFamily::Saso { nnz_per_col: nnz }),
        Just(SketchFamily::Srft),
    ]
}

fn tall() -> impl Strategy<Value = (usize, usize, u64)> {
    (4usize..=30).prop_flat_map(|n| (4 * n..=8 * n + 40, Just(n), any::<u64>()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn deterministic((m, n, seed) in tall(), f in family()) {
        let a = gen_gaussian(m, n, seed);
        let cfg = CqrrptConfig { family: f, seed: seed ^ 5, ..Default::default() };
        let (x, y) = (cqrrpt(&a, &cfg).unwrap(), cqrrpt(&a, &cfg).unwrap());
        prop_assert_eq!(x.factorization.q.data(), y.factorization.q.data());
        prop_assert_eq!(x, y);
    }

    #[test]
    fn exact_rank_validates_when_sketch_embeds((m, n, seed) in tall()) {
        let a = gen_gaussian(m, n, seed);
        let cfg = CqrrptConfig { family: SketchFamily::Gaussian, gamma: 2.0, seed: seed ^ 1, ..Default::default() };
        let d = cfg.sketch_dim(n);
        let s = SketchOperator::sample(SketchFamily::Gaussian, d, m, cfg.seed).unwrap();
        let out = cqrrpt_core(&a, &s, &cfg).unwrap();
        prop_assume!(diagnostics(&s, &a).unwrap().effective_distortion < 1.0 && out.k == n);
        let rep = validate(&out.factorization, &a, 100.0 * n as f64 * UNIT_ROUNDOFF).unwrap();
        prop_assert!(rep.pass, "{:?}", rep);
    }

    #[test]
    fn loss_bounded_on_ill_conditioned_input((m, n, seed) in tall(), f in family(), log_cond in 0.0f64..14.0) {
        let a = gen_spectral(m, n, &SpectrumSpec::PolynomialDecay { cond: 10f64.powf(log_cond) }, seed).unwrap();
        let out = cqrrpt(&a, &CqrrptConfig { family: f, seed: seed ^ 2, ..Default::default() }).unwrap();
        let loss = orthogonality_loss(&out.factorization.q).unwrap();
        prop_assert!(loss <= 180.0 * (m * n) as f64 * UNIT_ROUNDOFF, "{}", loss);
    }

    #[test]
    fn sketch_trailing_mass_is_monotone((m, n, seed) in tall(), r in 1usize..=30) {
        let a = gen_exact_rank(m, n, r.min(n), seed);
        let sk = qrcp_maxnorm_r(&SketchOperator::sample(SketchFamily::Gaussian, 2 * n, m, seed).unwrap().apply(&a).unwrap(), 0.0);
        let t = trailing_norms(&sk.r);
        prop_assert!(t.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn strong_embedding_gives_well_conditioned_preconditioner(seed in any::<u64>(), n in 2usize..=12) {
        let m = 1000;
        let a = gen_gaussian(m, n, seed);
        let s = SketchOperator::sample(SketchFamily::Gaussian, 32 * n, m, seed ^ 4).unwrap();
        prop_assume!(diagnostics(&s, &a).unwrap().distortion <= 0.25);
        let cfg = CqrrptConfig { family: SketchFamily::Gaussian, ..Default::default() };
        let sig = svd_values(&precondition(&a, &s, &cfg).unwrap().m_pre).unwrap();
        prop_assert!(sig[0] / sig[n - 1] <= 1.8);
    }

    #[test]
    fn power_of_two_scaling_keeps_pivots((m, n, seed) in tall(), p in -40i32..=40) {
        let a = gen_gaussian(m, n, seed);
        let cfg = CqrrptConfig { seed, ..Default::default() };
        let (x, y) = (cqrrpt(&a, &cfg).unwrap(), cqrrpt(&a.scaled(2f64.powi(p)), &cfg).unwrap());
        prop_assert_eq!(x.k, y.k);
        prop_assert_eq!(x.factorization.pivots, y.factorization.pivots);
    }
}

#[test]
fn config_is_validated() {
    let a = gen_gaussian(50, 5, 1);
    for cfg in [
        CqrrptConfig { gamma: 0.9, ..Default::default() },
        CqrrptConfig { eps_tol: UNIT_ROUNDOFF / 2.0, ..Default::default() },
        CqrrptConfig { rank_tol: Some(-1.0), ..Default::default() },
    ] {
        assert!(cqrrpt(&a, &cfg).is_err(), "{cfg:?}");
    }
}
