//! Sketching operators (Gaussian, SASO, SRFT) and subspace geometry:
//! leverage scores, coherence, distortion.

mod diagnostics;
mod hadamard;

pub use diagnostics::{diagnostics, SubspaceDiagnostics};
pub use hadamard::fwht;

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{svd, DenseMatrix};

/// Relative singular-value cutoff used when building a basis for `range(M)`.
pub const RANGE_DROP_TOL: f64 = 1e-12;

const BLOB_MAGIC: &[u8; 4] = b"SKOP";
const BLOB_VERSION: u8 = 1;
const BLOB_LEN: usize = 4 + 1 + 1 + 4 * 8;

/// Distribution a sketching operator is drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SketchFamily {
    /// iid `N(0, 1/d)` entries.
    Gaussian,
    /// Short-axis-sparse: every column holds `nnz_per_col` entries `±1/√d`
    /// in distinct, uniformly chosen rows.
    Saso { nnz_per_col: usize },
    /// `(1/√d)·C·H·D` with `D` random signs, `H` the Walsh–Hadamard matrix of
    /// the padded dimension and `C` a uniform row selection.
    Srft,
}

impl SketchFamily {
    fn tag(self) -> u8 {
        match self {
            SketchFamily::Gaussian => 0,
            SketchFamily::Saso { .. } => 1,
            SketchFamily::Srft => 2,
        }
    }

    fn nnz(self) -> usize {
        match self {
            SketchFamily::Saso { nnz_per_col } => nnz_per_col,
            _ => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SketchFamily::Gaussian => "gaussian",
            SketchFamily::Saso { .. } => "saso",
            SketchFamily::Srft => "srft",
        }
    }
}

impl Default for SketchFamily {
    fn default() -> Self {
        SketchFamily::Saso { nnz_per_col: 4 }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Dense(DenseMatrix),
    Saso { rows: Vec<u32>, vals: Vec<f64> },
    Srft { signs: Vec<f64>, selected: Vec<usize>, padded: usize },
}

/// A sampled `d x m` sketching operator, applied from the left.
#[derive(Clone, Debug, PartialEq)]
pub struct SketchOperator {
    family: SketchFamily,
    d: usize,
    m: usize,
    seed: u64,
    repr: Repr,
}

impl SketchOperator {
    /// Draws an operator from `family`. The same arguments always give a
    /// bitwise-identical operator.
    pub fn sample(family: SketchFamily, d: usize, m: usize, seed: u64) -> Result<Self> {
        if d == 0 || m == 0 {
            return Err(Error::InvalidArgument(format!(
                "sketch dimensions must be positive, got d={d}, m={m}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (d as f64).sqrt();
        let repr = match family {
            SketchFamily::Gaussian => {
                let data = (0..d * m)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        scale * z
                    })
                    .collect();
                Repr::Dense(DenseMatrix::from_col_major(d, m, data)?)
            }
            SketchFamily::Saso { nnz_per_col } => {
                if nnz_per_col == 0 || nnz_per_col > d {
                    return Err(Error::InvalidArgument(format!(
                        "SASO needs 1 <= nnz_per_col <= d, got {nnz_per_col} with d={d}"
                    )));
                }
                let mut rows = Vec::with_capacity(m * nnz_per_col);
                let mut vals = Vec::with_capacity(m * nnz_per_col);
                for _ in 0..m {
                    for r in sample_indices(&mut rng, d, nnz_per_col) {
                        rows.push(r as u32);
                        vals.push(if rng.random::<bool>() { scale } else { -scale });
                    }
                }
                Repr::Saso { rows, vals }
            }
            SketchFamily::Srft => {
                if d > m {
                    return Err(Error::InvalidArgument(format!(
                        "SRFT needs d <= m, got d={d}, m={m}"
                    )));
                }
                let padded = m.next_power_of_two();
                let signs = (0..m)
                    .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                    .collect();
                let mut selected = sample_indices(&mut rng, padded, d).into_vec();
                selected.sort_unstable();
                Repr::Srft { signs, selected, padded }
            }
        };
        Ok(Self { family, d, m, seed, repr })
    }

    pub fn family(&self) -> SketchFamily {
        self.family
    }

    /// Number of rows (sketch dimension).
    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of columns (domain dimension).
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `S·M`.
    pub fn apply(&self, mat: &DenseMatrix) -> Result<DenseMatrix> {
        if mat.rows() != self.m {
            return Err(Error::DimensionMismatch(format!(
                "sketch expects {} rows, matrix has {}",
                self.m,
                mat.rows()
            )));
        }
        let n = mat.cols();
        Ok(match &self.repr {
            Repr::Dense(s) => s.matmul(mat),
            Repr::Saso { rows, vals } => {
                let nnz = self.family.nnz();
                let mut out = DenseMatrix::zeros(self.d, n);
                for j in 0..n {
                    let src = mat.col(j);
                    let dst = out.col_mut(j);
                    for (i, &x) in src.iter().enumerate() {
                        if x == 0.0 {
                            continue;
                        }
                        let span = i * nnz..(i + 1) * nnz;
                        for (&r, &v) in rows[span.clone()].iter().zip(&vals[span]) {
                            dst[r as usize] += v * x;
                        }
                    }
                }
                out
            }
            Repr::Srft { signs, selected, padded } => {
                let scale = 1.0 / (self.d as f64).sqrt();
                let mut buf = vec![0.0; *padded];
                let mut out = DenseMatrix::zeros(self.d, n);
                for j in 0..n {
                    for ((b, &x), &s) in buf.iter_mut().zip(mat.col(j)).zip(signs) {
                        *b = s * x;
                    }
                    buf[self.m..].fill(0.0);
                    fwht(&mut buf);
                    for (o, &r) in out.col_mut(j).iter_mut().zip(selected) {
                        *o = scale * buf[r];
                    }
                }
                out
            }
        })
    }

    /// The operator as an explicit `d x m` matrix.
    pub fn to_dense(&self) -> DenseMatrix {
        match &self.repr {
            Repr::Dense(s) => s.clone(),
            _ => self
                .apply(&DenseMatrix::identity(self.m))
                .expect("identity has m rows"),
        }
    }

    /// Nonzero pattern of SASO column `i` as `(row, value)` pairs; `None` for
    /// other families.
    pub fn saso_column(&self, i: usize) -> Option<Vec<(usize, f64)>> {
        match &self.repr {
            Repr::Saso { rows, vals } => {
                let nnz = self.family.nnz();
                let span = i * nnz..(i + 1) * nnz;
                Some(
                    rows[span.clone()]
                        .iter()
                        .zip(&vals[span])
                        .map(|(&r, &v)| (r as usize, v))
                        .collect(),
                )
            }
            _ => None,
        }
    }

    /// Approximate flop count of applying the operator to an `m x n` matrix.
    pub fn apply_cost(&self, n: usize) -> f64 {
        let (d, m, n) = (self.d as f64, self.m as f64, n as f64);
        match &self.repr {
            Repr::Dense(_) => 2.0 * d * m * n,
            Repr::Saso { .. } => 2.0 * self.family.nnz() as f64 * m * n,
            Repr::Srft { padded, .. } => {
                let p = *padded as f64;
                n * (p * p.log2() + m + d)
            }
        }
    }

    /// Self-describing blob: magic, version, family tag, then `d`, `m`,
    /// `nnz_per_col` and `seed` as little-endian `u64`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(BLOB_LEN);
        out.extend_from_slice(BLOB_MAGIC);
        out.push(BLOB_VERSION);
        out.push(self.family.tag());
        for v in [self.d as u64, self.m as u64, self.family.nnz() as u64, self.seed] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Rebuilds an operator from [`to_bytes`](Self::to_bytes) output by re-sampling.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != BLOB_LEN {
            return Err(Error::MalformedBlob(format!(
                "expected {BLOB_LEN} bytes, got {}",
                bytes.len()
            )));
        }
        if &bytes[..4] != BLOB_MAGIC {
            return Err(Error::MalformedBlob("bad magic".into()));
        }
        if bytes[4] != BLOB_VERSION {
            return Err(Error::MalformedBlob(format!("unsupported version {}", bytes[4])));
        }
        let word = |i: usize| {
            let start = 6 + 8 * i;
            u64::from_le_bytes(bytes[start..start + 8].try_into().expect("8 bytes"))
        };
        let to_usize = |v: u64| {
            usize::try_from(v).map_err(|_| Error::MalformedBlob(format!("dimension {v} too large")))
        };
        let (d, m, nnz, seed) = (to_usize(word(0))?, to_usize(word(1))?, to_usize(word(2))?, word(3));
        let family = match bytes[5] {
            0 => SketchFamily::Gaussian,
            1 => SketchFamily::Saso { nnz_per_col: nnz },
            2 => SketchFamily::Srft,
            t => return Err(Error::MalformedBlob(format!("unknown family tag {t}"))),
        };
        Self::sample(family, d, m, seed)
    }
}

/// Orthonormal basis for the numerical range of `m`: left singular vectors
/// whose singular values exceed `RANGE_DROP_TOL·σ₁`.
pub fn range_basis(m: &DenseMatrix) -> Result<DenseMatrix> {
    let f = svd(m)?;
    let top = f.s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let r = f.s.iter().take_while(|s| **s > RANGE_DROP_TOL * top).count();
    Ok(f.u.leading_cols(r))
}

/// Squared row norms of an orthonormal basis for `range(m)`.
pub fn leverage_scores(m: &DenseMatrix) -> Result<Vec<f64>> {
    let u = range_basis(m)?;
    let mut scores = vec![0.0; u.rows()];
    for j in 0..u.cols() {
        for (s, x) in scores.iter_mut().zip(u.col(j)) {
            *s += x * x;
        }
    }
    Ok(scores)
}

/// `m` times the largest leverage score.
pub fn coherence(m: &DenseMatrix) -> Result<f64> {
    let scores = leverage_scores(m)?;
    Ok(m.rows() as f64 * scores.iter().fold(0.0f64, |a, &b| a.max(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::orthogonality_loss;
    use crate::testmat::gen_gaussian;

    #[test]
    fn saso_columns_are_exact() {
        let s = SketchOperator::sample(SketchFamily::Saso { nnz_per_col: 1 }, 4, 10, 3).unwrap();
        for i in 0..10 {
            let col = s.saso_column(i).unwrap();
            assert_eq!(col.len(), 1);
            assert!(col[0].1 == 0.5 || col[0].1 == -0.5);
        }
        let dense = s.to_dense();
        for i in 0..10 {
            assert_eq!(dense.col(i).iter().filter(|v| **v != 0.0).count(), 1);
        }
    }

    #[test]
    fn srft_square_power_of_two_is_orthogonal() {
        let s = SketchOperator::sample(SketchFamily::Srft, 64, 64, 9).unwrap();
        assert!(orthogonality_loss(&s.to_dense()).unwrap() <= 1e-12);
    }

    #[test]
    fn srft_rows_are_orthogonal_with_scale() {
        let s = SketchOperator::sample(SketchFamily::Srft, 20, 128, 2).unwrap().to_dense();
        let sst = s.matmul(&s.transpose());
        let want = DenseMatrix::identity(20).scaled(128.0 / 20.0);
        assert!(sst.sub(&want).max_abs() <= 1e-12);
    }

    #[test]
    fn apply_matches_dense_for_all_families() {
        let m = gen_gaussian(37, 5, 1);
        for family in [
            SketchFamily::Gaussian,
            SketchFamily::Saso { nnz_per_col: 3 },
            SketchFamily::Srft,
        ] {
            let s = SketchOperator::sample(family, 12, 37, 5).unwrap();
            let fast = s.apply(&m).unwrap();
            let slow = s.to_dense().matmul(&m);
            assert!(fast.sub(&slow).frobenius_norm() <= 1e-13 * m.frobenius_norm(), "{family:?}");
            assert_eq!(s.apply(&DenseMatrix::zeros(37, 2)).unwrap(), DenseMatrix::zeros(12, 2));
        }
    }

    #[test]
    fn invalid_dimensions() {
        assert!(SketchOperator::sample(SketchFamily::Srft, 10, 5, 0).is_err());
        assert!(SketchOperator::sample(SketchFamily::Saso { nnz_per_col: 5 }, 4, 10, 0).is_err());
        assert!(SketchOperator::sample(SketchFamily::Gaussian, 0, 10, 0).is_err());
        let s = SketchOperator::sample(SketchFamily::Gaussian, 3, 10, 0).unwrap();
        assert!(s.apply(&DenseMatrix::zeros(9, 1)).is_err());
    }

    #[test]
    fn blob_roundtrip() {
        let s = SketchOperator::sample(SketchFamily::Saso { nnz_per_col: 2 }, 7, 30, 11).unwrap();
        let bytes = s.to_bytes();
        assert_eq!(&bytes[..4], b"SKOP");
        assert_eq!(SketchOperator::from_bytes(&bytes).unwrap(), s);
        assert!(SketchOperator::from_bytes(&bytes[..10]).is_err());
        let mut bad = bytes.clone();
        bad[5] = 9;
        assert!(SketchOperator::from_bytes(&bad).is_err());
    }

    #[test]
    fn leverage_of_identity_columns() {
        let m = DenseMatrix::from_diagonal(6, 2, &[1.0, 1.0]);
        let s = leverage_scores(&m).unwrap();
        assert_eq!(s.len(), 6);
        for (i, v) in s.iter().enumerate() {
            let want = if i < 2 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-12);
        }
        assert!((coherence(&m).unwrap() - 6.0).abs() < 1e-10);
        assert!(matches!(leverage_scores(&DenseMatrix::zeros(3, 2)), Err(Error::ZeroMatrix)));
    }

    #[test]
    fn square_invertible_has_unit_scores() {
        let m = gen_gaussian(6, 6, 3);
        for v in leverage_scores(&m).unwrap() {
            assert!((v - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn gaussian_is_low_coherence() {
        let m = gen_gaussian(1000, 20, 4);
        let scores = leverage_scores(&m).unwrap();
        assert!((scores.iter().sum::<f64>() - 20.0).abs() < 1e-10);
        assert!(coherence(&m).unwrap() < 80.0);
    }
}
