//! Seeded test-matrix generators.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Reflectors};

/// Plateau values of the staircase spectrum, one per quarter of the index range.
pub const STAIRCASE_LEVELS: [f64; 4] = [1.0, 8e-10, 4e-10, 1e-10];

/// Row scaling applied to the randomly chosen rows of the high-coherence matrix.
pub const HIGH_COHERENCE_SCALE: f64 = 1e10;

/// Singular-value profile for [`gen_spectral`].
#[derive(Clone, Debug, PartialEq)]
pub enum SpectrumSpec {
    /// First `⌈n/10⌉` values equal one, the rest decay polynomially to `1/cond`.
    PolynomialDecay { cond: f64 },
    /// Four plateaus on the quarters of `1..=n`.
    Staircase { levels: [f64; 4] },
    /// Values given explicitly; must be positive and non-increasing.
    Explicit(Vec<f64>),
}

impl SpectrumSpec {
    pub fn staircase() -> Self {
        SpectrumSpec::Staircase {
            levels: STAIRCASE_LEVELS,
        }
    }

    /// The `n` singular values this profile describes, descending.
    pub fn values(&self, n: usize) -> Result<Vec<f64>> {
        let vals = match self {
            SpectrumSpec::PolynomialDecay { cond } => {
                if !(*cond >= 1.0 && cond.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "decay condition number must be finite and >= 1, got {cond}"
                    )));
                }
                let flat = n.div_ceil(10);
                let shift = n as f64 / 10.0;
                let span = n as f64 - shift;
                let p = if span > 1.0 { cond.ln() / span.ln() } else { 0.0 };
                (1..=n)
                    .map(|i| {
                        if i <= flat {
                            1.0
                        } else {
                            (i as f64 - shift).powf(-p)
                        }
                    })
                    .collect()
            }
            SpectrumSpec::Staircase { levels } => {
                let b1 = n.div_ceil(4);
                let b2 = n.div_ceil(2);
                let b3 = (3 * n).div_ceil(4);
                (1..=n)
                    .map(|i| match i {
                        _ if i <= b1 => levels[0],
                        _ if i <= b2 => levels[1],
                        _ if i <= b3 => levels[2],
                        _ => levels[3],
                    })
                    .collect()
            }
            SpectrumSpec::Explicit(v) => {
                if v.len() != n {
                    return Err(Error::InvalidArgument(format!(
                        "explicit spectrum has {} values, expected {n}",
                        v.len()
                    )));
                }
                v.clone()
            }
        };
        if vals.iter().any(|v| *v <= 0.0 || !v.is_finite())
            || vals.windows(2).any(|w| w[1] > w[0])
        {
            return Err(Error::InvalidArgument(
                "spectrum must be positive and non-increasing".into(),
            ));
        }
        Ok(vals)
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn fill_gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| StandardNormal.sample(rng)).collect();
    DenseMatrix::from_col_major(rows, cols, data).expect("length matches")
}

/// iid standard normal entries.
pub fn gen_gaussian(m: usize, n: usize, seed: u64) -> DenseMatrix {
    fill_gaussian(&mut rng(seed), m, n)
}

/// `A·B` with `A` (`m x r`) and `B` (`r x n`) iid standard normal.
pub fn gen_exact_rank(m: usize, n: usize, r: usize, seed: u64) -> DenseMatrix {
    let mut g = rng(seed);
    let a = fill_gaussian(&mut g, m, r);
    let b = fill_gaussian(&mut g, r, n);
    a.matmul(&b)
}

/// `m x n` matrix with orthonormal columns: the Q factor of a Gaussian matrix.
pub fn random_orthonormal(m: usize, n: usize, seed: u64) -> DenseMatrix {
    assert!(m >= n, "random_orthonormal needs m >= n");
    Reflectors::factor(gen_gaussian(m, n, seed)).thin_q(n)
}

/// `U·diag(σ)·Vᵀ` with `U`, `V` the orthogonal factors of seeded Gaussian matrices.
pub fn gen_spectral(m: usize, n: usize, spec: &SpectrumSpec, seed: u64) -> Result<DenseMatrix> {
    if m < n {
        return Err(Error::InvalidArgument(format!("gen_spectral needs m >= n, got {m}x{n}")));
    }
    let sigma = spec.values(n)?;
    let mut g = rng(seed);
    let left = Reflectors::factor(fill_gaussian(&mut g, m, n));
    let v = Reflectors::factor(fill_gaussian(&mut g, n, n)).thin_q(n);
    // Apply the left factor implicitly to [Σ Vᵀ; 0].
    let mut out = DenseMatrix::zeros(m, n);
    for j in 0..n {
        for (i, s) in sigma.iter().enumerate() {
            out[(i, j)] = s * v[(j, i)];
        }
    }
    left.apply_q(n, &mut out);
    Ok(out)
}

/// Stacked identities with `n` random rows scaled, then rotated on the right
/// by a seeded random orthogonal matrix.
pub fn gen_high_coherence(m: usize, n: usize, scale: f64, seed: u64) -> Result<DenseMatrix> {
    high_coherence(m, n, scale, seed, true)
}

/// [`gen_high_coherence`] without the final rotation.
pub fn gen_high_coherence_unrotated(m: usize, n: usize, scale: f64, seed: u64) -> Result<DenseMatrix> {
    high_coherence(m, n, scale, seed, false)
}

/// Exact singular values of [`gen_high_coherence`] with the same arguments.
///
/// Before the rotation the columns are orthogonal, so the singular values are
/// the column norms, sorted.
pub fn high_coherence_spectrum(m: usize, n: usize, scale: f64, seed: u64) -> Result<Vec<f64>> {
    let row_scale = high_coherence_rows(m, n, scale, &mut rng(seed))?;
    let mut sq = vec![0.0f64; n];
    for (i, r) in row_scale.iter().enumerate() {
        sq[i % n] += r * r;
    }
    let mut s: Vec<f64> = sq.into_iter().map(f64::sqrt).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

fn high_coherence_rows(m: usize, n: usize, scale: f64, g: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    if m < n || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "high-coherence matrix needs m >= n >= 1, got {m}x{n}"
        )));
    }
    let mut row_scale = vec![1.0; m];
    for i in sample(g, m, n) {
        row_scale[i] = scale;
    }
    Ok(row_scale)
}

fn high_coherence(m: usize, n: usize, scale: f64, seed: u64, rotate: bool) -> Result<DenseMatrix> {
    let mut g = rng(seed);
    let row_scale = high_coherence_rows(m, n, scale, &mut g)?;
    let v = if rotate {
        Reflectors::factor(fill_gaussian(&mut g, n, n)).thin_q(n)
    } else {
        DenseMatrix::identity(n)
    };
    // Row i of the stacked identity is e_{i mod n}, so row i of the product
    // is a scaled copy of row (i mod n) of V.
    Ok(DenseMatrix::from_fn(m, n, |i, j| row_scale[i] * v[(i % n, j)]))
}

/// Kahan matrix `diag(1, s, ..., s^{n-1})·(I - c·(strict upper ones))` with
/// `s = sin θ`, `c = cos θ`.
pub fn gen_kahan(n: usize, theta: f64) -> Result<DenseMatrix> {
    if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidArgument(format!(
            "Kahan angle must lie in (0, pi/2), got {theta}"
        )));
    }
    let (s, c) = theta.sin_cos();
    let mut k = DenseMatrix::zeros(n, n);
    let mut scale = 1.0;
    for i in 0..n {
        k[(i, i)] = scale;
        for j in i + 1..n {
            k[(i, j)] = -c * scale;
        }
        scale *= s;
    }
    Ok(k)
}

/// [`gen_kahan`] plus `pert·ε·diag(n, n−1, ..., 1)`, `ε = 2⁻⁵²`. Without the
/// perturbation every column has unit norm, so pivoting decisions are ties
/// decided by rounding; the perturbation makes the natural order the strict
/// max-norm choice at every step.
pub fn gen_kahan_perturbed(n: usize, theta: f64, pert: f64) -> Result<DenseMatrix> {
    let mut k = gen_kahan(n, theta)?;
    for i in 0..n {
        k[(i, i)] += pert * f64::EPSILON * (n - i) as f64;
    }
    Ok(k)
}

/// Default perturbation for [`gen_kahan_perturbed`].
pub const KAHAN_PERTURBATION: f64 = 25.0;
