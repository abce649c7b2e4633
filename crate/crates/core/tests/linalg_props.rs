use cqrrpt::linalg::{cholesky, householder_qr, svd_values, trsm_right, UNIT_ROUNDOFF};
use cqrrpt::testmat::gen_gaussian;
use cqrrpt::DenseMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn shape() -> impl Strategy<Value = (usize, usize, u64)> {
    (1usize..=24).prop_flat_map(|n| (n..=3 * n + 8, Just(n), any::<u64>()))
}

/// Seeded upper-triangular matrix with diagonal in `[1, 2]`.
fn triangular(n: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Less => rng.random_range(-1.0..1.0),
        std::cmp::Ordering::Equal => rng.random_range(1.0..2.0),
        std::cmp::Ordering::Greater => 0.0,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn householder_reconstructs((m, n, seed) in shape()) {
        let a = gen_gaussian(m, n, seed);
        let (q, r) = householder_qr(&a).unwrap();
        let err = a.sub(&q.matmul(&r)).frobenius_norm();
        prop_assert!(err <= 10.0 * n as f64 * UNIT_ROUNDOFF * a.frobenius_norm());
        prop_assert!(r.is_upper_triangular());
    }

    #[test]
    fn cholesky_round_trips(n in 1usize..=20, seed in any::<u64>()) {
        let r = triangular(n, seed);
        let back = cholesky(&r.tr_matmul(&r)).unwrap();
        prop_assert!(back.sub(&r).frobenius_norm() <= 1e-13 * r.frobenius_norm() * n as f64);
    }

    #[test]
    fn singular_values_ignore_column_permutation_and_sign((m, n, seed) in shape()) {
        let a = gen_gaussian(m, n, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let mut b = a.select_cols(&perm);
        for j in 0..n {
            if rng.random::<bool>() {
                b.col_mut(j).iter_mut().for_each(|v| *v = -*v);
            }
        }
        let (sa, sb) = (svd_values(&a).unwrap(), svd_values(&b).unwrap());
        for (x, y) in sa.iter().zip(&sb) {
            prop_assert!((x - y).abs() <= 1e-12 * sa[0]);
        }
    }

    #[test]
    fn trsm_undoes_triangular_product((m, n, seed) in shape()) {
        let q = householder_qr(&gen_gaussian(m, n, seed)).unwrap().0;
        let r = triangular(n, seed ^ 7);
        let back = trsm_right(&q.matmul(&r), &r).unwrap();
        prop_assert!(back.sub(&q).max_abs() <= 1e-12);
    }
}
