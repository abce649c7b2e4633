use std::fmt;
use std::ops::{Index, IndexMut, Range};

use crate::error::{Error, Result};

/// Number of rows processed together by the row-blocked kernels. A block of
/// this many rows times a few hundred columns stays resident in L2.
pub(crate) const ROW_BLOCK: usize = 256;

/// Column-major dense matrix of `f64`.
///
/// Entries are addressed 0-based through `Index<(usize, usize)>`; `entry` is
/// the 1-based accessor matching the usual mathematical notation.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// `rows x cols` matrix with the leading `min(rows, cols)` diagonal set to `diag`.
    pub fn from_diagonal(rows: usize, cols: usize, diag: &[f64]) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (i, &v) in diag.iter().enumerate().take(rows.min(cols)) {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a slice of equally sized rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(nrows, ncols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != ncols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {ncols}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// 1-based entry accessor: `entry(1, 1)` is the top-left entry.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        assert!(i >= 1 && j >= 1, "entry() is 1-based");
        self[(i - 1, j - 1)]
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Mutable access to two distinct columns at once.
    pub fn two_cols_mut(&mut self, a: usize, b: usize) -> (&mut [f64], &mut [f64]) {
        assert_ne!(a, b);
        let r = self.rows;
        if a < b {
            let (lo, hi) = self.data.split_at_mut(b * r);
            (&mut lo[a * r..(a + 1) * r], &mut hi[..r])
        } else {
            let (lo, hi) = self.data.split_at_mut(a * r);
            (&mut hi[..r], &mut lo[b * r..(b + 1) * r])
        }
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            let (x, y) = self.two_cols_mut(a, b);
            x.swap_with_slice(y);
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for (i, &v) in self.col(j).iter().enumerate() {
                t.data[i * self.cols + j] = v;
            }
        }
        t
    }

    /// Copy of the block `rows x cols`.
    pub fn submatrix(&self, rows: Range<usize>, cols: Range<usize>) -> Self {
        assert!(rows.end <= self.rows && cols.end <= self.cols);
        let nr = rows.end.saturating_sub(rows.start);
        let mut out = Self::zeros(nr, cols.end.saturating_sub(cols.start));
        for (jj, j) in cols.enumerate() {
            out.col_mut(jj).copy_from_slice(&self.col(j)[rows.clone()]);
        }
        out
    }

    /// Leading `k` columns.
    pub fn leading_cols(&self, k: usize) -> Self {
        assert!(k <= self.cols);
        Self {
            rows: self.rows,
            cols: k,
            data: self.data[..k * self.rows].to_vec(),
        }
    }

    /// Columns gathered in the order given, i.e. `M[:, idx]`.
    pub fn select_cols(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for &j in idx {
            data.extend_from_slice(self.col(j));
        }
        Self {
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    /// Writes `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &DenseMatrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for j in 0..block.cols {
            self.col_mut(c0 + j)[r0..r0 + block.rows].copy_from_slice(block.col(j));
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn sub(&self, other: &DenseMatrix) -> Self {
        assert_eq!(self.shape(), other.shape());
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.cols).all(|j| self.col(j).iter().skip(j + 1).all(|&v| v == 0.0))
    }

    /// Zeroes everything strictly below the main diagonal.
    pub fn triu(mut self) -> Self {
        for j in 0..self.cols {
            let start = (j + 1).min(self.rows);
            self.col_mut(j)[start..].fill(0.0);
        }
        self
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// `self * other`, row-blocked so each block of `self` is reused from cache.
    pub fn matmul(&self, other: &DenseMatrix) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let (m, p, n) = (self.rows, self.cols, other.cols);
        let mut out = Self::zeros(m, n);
        let mut r0 = 0;
        while r0 < m {
            let r1 = (r0 + ROW_BLOCK).min(m);
            for j in 0..n {
                let bj = other.col(j);
                let cj = &mut out.data[j * m + r0..j * m + r1];
                for (l, &b) in bj.iter().enumerate().take(p) {
                    if b != 0.0 {
                        axpy(b, &self.data[l * m + r0..l * m + r1], cj);
                    }
                }
            }
            r0 = r1;
        }
        out
    }

    /// `selfᵀ * other` without forming the transpose.
    pub fn tr_matmul(&self, other: &DenseMatrix) -> Self {
        assert_eq!(self.rows, other.rows, "tr_matmul: row counts differ");
        let (m, p, n) = (self.rows, self.cols, other.cols);
        let mut out = Self::zeros(p, n);
        let mut r0 = 0;
        while r0 < m {
            let r1 = (r0 + ROW_BLOCK).min(m);
            for j in 0..n {
                let bj = &other.col(j)[r0..r1];
                for i in 0..p {
                    out.data[j * p + i] += dot(&self.col(i)[r0..r1], bj);
                }
            }
            r0 = r1;
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                axpy(xj, self.col(j), &mut y);
            }
        }
        y
    }

    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        (0..self.cols).map(|j| dot(self.col(j), x)).collect()
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(12) {
            let row: Vec<String> = (0..self.cols.min(8))
                .map(|j| format!("{:>12.5e}", self[(i, j)]))
                .collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // Four independent accumulators let the loop vectorize.
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Overflow-safe Euclidean norm.
pub(crate) fn norm2(x: &[f64]) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    if !(1e-150..=1e150).contains(&scale) {
        let inv = 1.0 / scale;
        let s: f64 = x.iter().map(|v| (v * inv) * (v * inv)).sum();
        scale * s.sqrt()
    } else {
        dot(x, x).sqrt()
    }
}

/// The `(A_ℓ, B_ℓ, C_ℓ)` blocks of a `k x n` upper-trapezoidal factor split
/// after its first `ell` rows and columns:
///
/// ```text
/// R = [ A_ℓ  B_ℓ ]
///     [  0   C_ℓ ]
/// ```
#[derive(Clone, Copy, Debug)]
pub struct TriangularPartition<'a> {
    source: &'a DenseMatrix,
    ell: usize,
}

impl<'a> TriangularPartition<'a> {
    pub fn new(source: &'a DenseMatrix, ell: usize) -> Result<Self> {
        if ell == 0 || ell > source.rows() || ell > source.cols() {
            return Err(Error::InvalidArgument(format!(
                "split index {ell} outside 1..={} for a {}x{} factor",
                source.rows().min(source.cols()),
                source.rows(),
                source.cols()
            )));
        }
        Ok(Self { source, ell })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn a(&self) -> DenseMatrix {
        self.source.submatrix(0..self.ell, 0..self.ell)
    }

    pub fn b(&self) -> DenseMatrix {
        self.source.submatrix(0..self.ell, self.ell..self.source.cols())
    }

    pub fn c(&self) -> DenseMatrix {
        self.source
            .submatrix(self.ell..self.source.rows(), self.ell..self.source.cols())
    }

    /// Reassembles `[A B; 0 C]`.
    pub fn stack(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.source.rows(), self.source.cols());
        out.set_block(0, 0, &self.a());
        out.set_block(0, self.ell, &self.b());
        out.set_block(self.ell, self.ell, &self.c());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_based_entry_matches_index() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(m.entry(1, 2), 2.0);
        assert_eq!(m.entry(2, 1), 3.0);
        assert_eq!(m[(1, 0)], 3.0);
        assert_eq!(m.col(1), &[2.0, 4.0]);
        assert_eq!(m.row(1), vec![3.0, 4.0]);
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(DenseMatrix::from_col_major(2, 2, vec![1.0; 3]).is_err());
        assert!(DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn matmul_matches_naive() {
        let a = DenseMatrix::from_fn(300, 7, |i, j| ((i * 7 + j) % 11) as f64 - 5.0);
        let b = DenseMatrix::from_fn(7, 5, |i, j| (i as f64) - 2.0 * j as f64);
        let c = a.matmul(&b);
        for i in 0..300 {
            for j in 0..5 {
                let naive: f64 = (0..7).map(|l| a[(i, l)] * b[(l, j)]).sum();
                assert_eq!(c[(i, j)], naive);
            }
        }
        let t = a.tr_matmul(&a);
        let t2 = a.transpose().matmul(&a);
        assert!(t.sub(&t2).max_abs() < 1e-9);
    }

    #[test]
    fn partition_restacks_exactly() {
        let r = DenseMatrix::from_fn(4, 6, |i, j| if i <= j { (i + 2 * j + 1) as f64 } else { 0.0 });
        for ell in 1..=4 {
            let p = TriangularPartition::new(&r, ell).unwrap();
            assert!(p.a().is_upper_triangular());
            assert_eq!(p.stack(), r);
            assert_eq!(p.b().shape(), (ell, 6 - ell));
            assert_eq!(p.c().shape(), (4 - ell, 6 - ell));
        }
        assert!(TriangularPartition::new(&r, 0).is_err());
        assert!(TriangularPartition::new(&r, 5).is_err());
    }

    #[test]
    fn norm2_survives_extreme_scales() {
        assert!((norm2(&[3e200, 4e200]) / 5e200 - 1.0).abs() < 1e-15);
        assert!((norm2(&[3e-200, 4e-200]) - 5e-200).abs() < 1e-214);
    }
}
