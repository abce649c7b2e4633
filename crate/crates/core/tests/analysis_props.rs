use cqrrpt::analysis::{
    inheritance_check, maxnorm_similarity_check, pivot_quality, rrqr_report, trailing_norms,
};
use cqrrpt::cqrrpt::{cqrrpt, CqrrptConfig};
use cqrrpt::qrcp::{default_rank_tol, qrcp_maxnorm};
use cqrrpt::sketching::{SketchFamily, SketchOperator};
use cqrrpt::testmat::{gen_exact_rank, gen_gaussian};
use cqrrpt::linalg::householder_r;
use cqrrpt::DenseMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn diagonal_factor_is_optimal(mut s in prop::collection::vec(1e-6f64..1e3, 1..=12)) {
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let n = s.len();
        let rep = rrqr_report(&DenseMatrix::from_diagonal(n, n, &s), &s).unwrap();
        prop_assert!(rep.f_lower.iter().chain(&rep.f_upper).all(|f| (f - 1.0).abs() <= 1e-10));
        prop_assert!(rep.g.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn inheritance_holds_for_any_pivots(seed in any::<u64>(), r in 1usize..=6, extra in 0usize..=4) {
        let (m, n) = (14, 8);
        let a = gen_exact_rank(m, n, r, seed);
        let s = SketchOperator::sample(SketchFamily::Gaussian, r + 2 + extra, m, seed ^ 11).unwrap();
        let mut j: Vec<usize> = (0..n).collect();
        j.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let rep = inheritance_check(&a, &s, &j).unwrap();
        prop_assert_eq!(rep.rank, r);
        prop_assert!(rep.all_hold(), "{:?}", rep);
    }

    #[test]
    fn similarity_bounds_hold(seed in any::<u64>(), ell in 0usize..=8, d in 14usize..=30) {
        let a = gen_gaussian(40, 12, seed);
        let s = SketchOperator::sample(SketchFamily::Gaussian, d, 40, seed ^ 13).unwrap();
        let rep = maxnorm_similarity_check(&a, &s, ell).unwrap();
        prop_assert!(rep.holds(), "{:?}", rep);
        prop_assert!(rep.delta_ratio >= rep.restricted_ratio - 1e-12);
    }

    #[test]
    fn reference_diag_ratio_in_classical_range(seed in any::<u64>(), n in 1usize..=16) {
        let a = gen_gaussian(3 * n + 5, n, seed);
        let f = qrcp_maxnorm(&a, default_rank_tol(n));
        let c = pivot_quality(&a, (&f).into(), (&f).into()).unwrap();
        let lo = ((n * (n + 1) / 2) as f64).sqrt().recip();
        let hi = 2f64.powi(n as i32 - 1);
        prop_assert!(c.diag_ratio_ref.iter().all(|&d| (lo..=hi).contains(&d)));
    }

    #[test]
    fn trailing_norms_match_householder_on_same_pivots(seed in any::<u64>(), n in 2usize..=16) {
        let a = gen_gaussian(6 * n, n, seed);
        let out = cqrrpt(&a, &CqrrptConfig { seed, ..Default::default() }).unwrap();
        let h = householder_r(&a.select_cols(&out.factorization.pivots));
        let (t1, t2) = (trailing_norms(&out.factorization.r), trailing_norms(&h));
        for k in 0..=n {
            prop_assert!((t1[k] - t2[k]).abs() <= 1e-12 * t2[0]);
        }
    }
}
