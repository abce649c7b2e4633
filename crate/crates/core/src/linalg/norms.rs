//! Power-iteration estimates of the spectral norm and 2-norm condition number.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::householder::householder_r;
use super::matrix::{norm2, DenseMatrix};
use super::triangular::{upper_solve_in_place, upper_tr_solve_in_place};

pub const POWER_MAX_ITERS: usize = 200;
pub const POWER_TOL: f64 = 1e-10;

const START_SEED: u64 = 0x05ee_d5ee_d5ee_d5ee;

/// Result of an iterative estimate. `value` is the best iterate seen, which
/// is always a lower bound on the quantity for the spectral norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub converged: bool,
}

fn start_vector(n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    x
}

/// Largest singular value of the operator `x -> A x` with adjoint `y -> Aᵀ y`.
pub(crate) fn power_iteration(
    n: usize,
    mut apply: impl FnMut(&[f64]) -> Vec<f64>,
    mut apply_t: impl FnMut(&[f64]) -> Vec<f64>,
) -> NormEstimate {
    if n == 0 {
        return NormEstimate { value: 0.0, converged: true };
    }
    let mut x = start_vector(n);
    let mut best = 0.0f64;
    let mut prev = 0.0f64;
    for _ in 0..POWER_MAX_ITERS {
        let y = apply(&x);
        let est = norm2(&y);
        if !est.is_finite() {
            return NormEstimate { value: f64::INFINITY, converged: true };
        }
        best = best.max(est);
        if est == 0.0 {
            return NormEstimate { value: best, converged: true };
        }
        if (est - prev).abs() <= POWER_TOL * est {
            return NormEstimate { value: best, converged: true };
        }
        prev = est;
        let z = apply_t(&y);
        let nz = norm2(&z);
        if nz == 0.0 {
            return NormEstimate { value: best, converged: true };
        }
        x = z.into_iter().map(|v| v / nz).collect();
    }
    NormEstimate { value: best, converged: false }
}

/// Estimate of `‖M‖₂` by power iteration on `MᵀM`.
pub fn spectral_norm(m: &DenseMatrix) -> NormEstimate {
    power_iteration(m.cols(), |x| m.matvec(x), |y| m.tr_matvec(y))
}

/// Estimate of `‖R⁻¹‖₂` for square upper-triangular `R`, via triangular solves.
/// Infinite when the diagonal has a zero.
pub(crate) fn inverse_norm_upper(r: &DenseMatrix) -> NormEstimate {
    if (0..r.rows()).any(|i| r[(i, i)] == 0.0) {
        return NormEstimate { value: f64::INFINITY, converged: true };
    }
    power_iteration(
        r.cols(),
        |x| {
            let mut v = x.to_vec();
            upper_solve_in_place(r, &mut v);
            v
        },
        |y| {
            let mut v = y.to_vec();
            upper_tr_solve_in_place(r, &mut v);
            v
        },
    )
}

/// Estimate of `cond₂(M)` for a matrix with at least as many rows as columns.
///
/// Triangular input is used directly; anything else is reduced to its `R`
/// factor first, which has the same singular values.
pub fn cond_2(m: &DenseMatrix) -> NormEstimate {
    let r;
    let tri = if m.rows() == m.cols() && m.is_upper_triangular() {
        m
    } else {
        r = householder_r(m);
        &r
    };
    if tri.rows() < tri.cols() {
        return NormEstimate { value: f64::INFINITY, converged: true };
    }
    let inv = inverse_norm_upper(tri);
    if inv.value.is_infinite() {
        return inv;
    }
    let top = spectral_norm(tri);
    NormEstimate {
        value: top.value * inv.value,
        converged: top.converged && inv.converged,
    }
}
