use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::factor::SymmetricFactor;

/// Compressed sparse row matrix assembled from triplets.
///
/// Duplicate triplets are summed and exact zeros dropped, so there is at
/// most one stored entry per `(row, col)` and columns are sorted per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> SparseMatrix<T> {
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut counts = vec![0usize; rows + 1];
        for &(r, c, _) in triplets {
            assert!(r < rows && c < cols, "triplet ({r}, {c}) outside {rows} x {cols}");
            counts[r + 1] += 1;
        }
        for i in 0..rows {
            counts[i + 1] += counts[i];
        }
        let mut slots = counts.clone();
        let mut entries = vec![(0usize, T::zero()); triplets.len()];
        for &(r, c, v) in triplets {
            entries[slots[r]] = (c, v);
            slots[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        for r in 0..rows {
            let row = &mut entries[counts[r]..counts[r + 1]];
            // stable: duplicates are summed in insertion order
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut s = T::zero();
                while k < row.len() && row[k].0 == c {
                    s += row[k].1;
                    k += 1;
                }
                if s != T::zero() {
                    col_idx.push(c);
                    values.push(s);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { rows, cols, row_ptr, col_idx, values }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, row_ptr: vec![0; rows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![T::one(); n])
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        let t: Vec<_> = d.iter().enumerate().map(|(i, v)| (i, i, *v)).collect();
        Self::from_triplets(d.len(), d.len(), &t)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entries of row `i` as `(column, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => T::zero(),
        }
    }

    pub fn triplets(&self) -> Vec<(usize, usize, T)> {
        (0..self.rows).flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v))).collect()
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.triplets().into_iter().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.cols, self.rows, &t)
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols, "vector length");
        (0..self.rows).map(|i| self.row(i).fold(T::zero(), |s, (j, v)| s + v * x[j])).collect()
    }

    /// `self^T x` without forming the transpose.
    pub fn tr_mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.rows, "vector length");
        let mut y = vec![T::zero(); self.cols];
        for (i, xi) in x.iter().enumerate() {
            for (j, v) in self.row(i) {
                y[j] += v * *xi;
            }
        }
        y
    }

    /// Sparse product `self * other`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions");
        let mut acc = vec![T::zero(); other.cols];
        let mut mark = vec![usize::MAX; other.cols];
        let mut touched = Vec::new();
        let mut trip = Vec::new();
        for i in 0..self.rows {
            touched.clear();
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = T::zero();
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                trip.push((i, j, acc[j]));
            }
        }
        Self::from_triplets(self.rows, other.cols, &trip)
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &Self, s: T) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shapes");
        let mut t = self.triplets();
        t.extend(other.triplets().into_iter().map(|(i, j, v)| (i, j, v * s)));
        Self::from_triplets(self.rows, self.cols, &t)
    }

    /// Block-diagonal concatenation.
    pub fn block_diag(blocks: &[&Self]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut t = Vec::new();
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            t.extend(b.triplets().into_iter().map(|(i, j, v)| (i + r0, j + c0, v)));
            r0 += b.rows;
            c0 += b.cols;
        }
        Self::from_triplets(rows, cols, &t)
    }

    /// Assembles a block matrix; `None` blocks are zero. Every block row
    /// needs at least one present block to fix its height, and likewise
    /// for block columns.
    pub fn from_blocks(blocks: &[Vec<Option<&Self>>]) -> Self {
        let nbr = blocks.len();
        let nbc = blocks.first().map_or(0, |r| r.len());
        let mut heights = vec![None; nbr];
        let mut widths = vec![None; nbc];
        for (bi, row) in blocks.iter().enumerate() {
            assert_eq!(row.len(), nbc, "ragged block layout");
            for (bj, b) in row.iter().enumerate() {
                if let Some(b) = b {
                    assert!(heights[bi].is_none_or(|h| h == b.rows), "block height mismatch");
                    assert!(widths[bj].is_none_or(|w| w == b.cols), "block width mismatch");
                    heights[bi] = Some(b.rows);
                    widths[bj] = Some(b.cols);
                }
            }
        }
        let heights: Vec<usize> = heights.into_iter().map(|h| h.unwrap_or(0)).collect();
        let widths: Vec<usize> = widths.into_iter().map(|w| w.unwrap_or(0)).collect();
        let mut t = Vec::new();
        let mut r0 = 0;
        for (bi, row) in blocks.iter().enumerate() {
            let mut c0 = 0;
            for (bj, b) in row.iter().enumerate() {
                if let Some(b) = b {
                    t.extend(b.triplets().into_iter().map(|(i, j, v)| (i + r0, j + c0, v)));
                }
                c0 += widths[bj];
            }
            r0 += heights[bi];
        }
        Self::from_triplets(heights.iter().sum(), widths.iter().sum(), &t)
    }

    /// Rows `idx` in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut t = Vec::new();
        for (new, &i) in idx.iter().enumerate() {
            t.extend(self.row(i).map(|(j, v)| (new, j, v)));
        }
        Self::from_triplets(idx.len(), self.cols, &t)
    }

    /// Columns `idx` in the given order.
    pub fn select_cols(&self, idx: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.cols];
        for (new, &j) in idx.iter().enumerate() {
            map[j] = new;
        }
        let t: Vec<_> = self
            .triplets()
            .into_iter()
            .filter(|(_, j, _)| map[*j] != usize::MAX)
            .map(|(i, j, v)| (i, map[j], v))
            .collect();
        Self::from_triplets(self.rows, idx.len(), &t)
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> T {
        (0..self.rows).fold(T::zero(), |m, i| m.max(self.row(i).fold(T::zero(), |s, (_, v)| s + v.abs())))
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// `||A - A^T||_inf <= tol * ||A||_inf`.
    pub fn is_symmetric(&self, tol: T) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let diff = self.add_scaled(&self.transpose(), -T::one());
        diff.norm_inf() <= tol * self.norm_inf()
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    /// Factorizes a square symmetric (possibly indefinite) matrix.
    pub fn factor_symmetric(&self) -> Result<SymmetricFactor<T>> {
        if self.rows != self.cols {
            return Err(Error::Dimension(format!("{} x {} matrix is not square", self.rows, self.cols)));
        }
        SymmetricFactor::new(self)
    }

    /// Solves `self x = b` for square symmetric `self`.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        self.factor_symmetric()?.solve(b)
    }
}
