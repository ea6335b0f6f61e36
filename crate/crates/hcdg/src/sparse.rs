//! Row-compressed sparse matrices with an element-block index, as assembled
//! by the DG operators. Keeps column ids sorted within rows, drops
//! numerically-zero fill at finalisation, and hashes the pattern for
//! equality tests.

use nalgebra::DMatrix;
use std::fmt::Write as _;

/// Relative drop threshold applied per row when finalising a pattern.
pub const DROP_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryHint {
    None,
    Symmetric,
}

/// CSR matrix plus the element -> global index ranges of its block structure.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
    /// Half-open global index range per element block.
    pub block_index: Vec<(usize, usize)>,
    pub symmetry_hint: SymmetryHint,
}

/// Triplet accumulator; duplicates are summed on build.
pub struct Builder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Builder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Builder {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, val: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        if val != 0.0 {
            self.entries.push((row, col, val));
        }
    }

    /// Merge duplicates, apply the per-row drop tolerance, and freeze.
    pub fn build(mut self, block_index: Vec<(usize, usize)>) -> SparseOperator {
        self.entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut cols = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        let mut i = 0;
        for r in 0..self.nrows {
            let row_start = cols.len();
            while i < self.entries.len() && self.entries[i].0 == r {
                let c = self.entries[i].1;
                let mut v = 0.0;
                while i < self.entries.len() && self.entries[i].0 == r && self.entries[i].1 == c {
                    v += self.entries[i].2;
                    i += 1;
                }
                cols.push(c);
                vals.push(v);
            }
            // Drop entries far below the row maximum.
            let row_max = vals[row_start..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let cut = DROP_TOL * row_max;
            let mut w = row_start;
            for k in row_start..vals.len() {
                if vals[k].abs() > cut {
                    cols[w] = cols[k];
                    vals[w] = vals[k];
                    w += 1;
                }
            }
            cols.truncate(w);
            vals.truncate(w);
            row_ptr[r + 1] = cols.len();
        }
        SparseOperator {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            cols,
            vals,
            block_index,
            symmetry_hint: SymmetryHint::None,
        }
    }
}

impl SparseOperator {
    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.cols[a..b], &self.vals[a..b])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let mut acc = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                acc += v * x[*c];
            }
            y[r] = acc;
        }
    }

    pub fn transpose(&self) -> SparseOperator {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.cols {
            counts[c + 1] += 1;
        }
        for i in 0..self.ncols {
            counts[i + 1] += counts[i];
        }
        let row_ptr = counts.clone();
        let mut cols = vec![0usize; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        let mut next = counts;
        for r in 0..self.nrows {
            let (rc, rv) = self.row(r);
            for (c, v) in rc.iter().zip(rv) {
                let k = next[*c];
                cols[k] = r;
                vals[k] = *v;
                next[*c] += 1;
            }
        }
        SparseOperator {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr,
            cols,
            vals,
            block_index: self.block_index.clone(),
            symmetry_hint: self.symmetry_hint,
        }
    }

    pub fn scaled(&self, s: f64) -> SparseOperator {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Right-multiply by a diagonal: columns j scaled by d[j].
    pub fn scale_cols(&self, d: &[f64]) -> SparseOperator {
        debug_assert_eq!(d.len(), self.ncols);
        let mut out = self.clone();
        for r in 0..self.nrows {
            let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
            for k in a..b {
                out.vals[k] *= d[self.cols[k]];
            }
        }
        out
    }

    /// Sparse product self * other, finalised with the drop tolerance.
    pub fn multiply(&self, other: &SparseOperator) -> SparseOperator {
        assert_eq!(self.ncols, other.nrows);
        let n = other.ncols;
        let mut acc = vec![0.0f64; n];
        let mut mark = vec![false; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for r in 0..self.nrows {
            let (rc, rv) = self.row(r);
            for (k, v) in rc.iter().zip(rv) {
                let (oc, ov) = other.row(*k);
                for (c, w) in oc.iter().zip(ov) {
                    if !mark[*c] {
                        mark[*c] = true;
                        touched.push(*c);
                    }
                    acc[*c] += v * w;
                }
            }
            touched.sort_unstable();
            let row_max = touched.iter().fold(0.0f64, |m, c| m.max(acc[*c].abs()));
            let cut = DROP_TOL * row_max;
            for &c in &touched {
                if acc[c].abs() > cut {
                    cols.push(c);
                    vals.push(acc[c]);
                }
                acc[c] = 0.0;
                mark[c] = false;
            }
            touched.clear();
            row_ptr[r + 1] = cols.len();
        }
        SparseOperator {
            nrows: self.nrows,
            ncols: n,
            row_ptr,
            cols,
            vals,
            block_index: self.block_index.clone(),
            symmetry_hint: SymmetryHint::None,
        }
    }

    /// self + s * other, finalised with the drop tolerance.
    pub fn add_scaled(&self, other: &SparseOperator, s: f64) -> SparseOperator {
        assert_eq!(self.nrows, other.nrows);
        assert_eq!(self.ncols, other.ncols);
        let mut b = Builder::new(self.nrows, self.ncols);
        for r in 0..self.nrows {
            let (rc, rv) = self.row(r);
            for (c, v) in rc.iter().zip(rv) {
                b.push(r, *c, *v);
            }
            let (oc, ov) = other.row(r);
            for (c, v) in oc.iter().zip(ov) {
                b.push(r, *c, s * *v);
            }
        }
        b.build(self.block_index.clone())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            let (rc, rv) = self.row(r);
            for (c, v) in rc.iter().zip(rv) {
                m[(r, *c)] = *v;
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// FNV-1a hash of the structure (dimensions and positions, not values).
    pub fn pattern_hash(&self) -> u64 {
        let mut h = 0xcbf29ce484222325u64;
        let mut eat = |x: u64| {
            for byte in x.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(self.nrows as u64);
        eat(self.ncols as u64);
        for &p in &self.row_ptr {
            eat(p as u64);
        }
        for &c in &self.cols {
            eat(c as u64);
        }
        h
    }

    /// True when every stored position of self also appears in other.
    pub fn pattern_subset_of(&self, other: &SparseOperator) -> bool {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return false;
        }
        for r in 0..self.nrows {
            let (rc, _) = self.row(r);
            let (oc, _) = other.row(r);
            let mut i = 0;
            for &c in rc {
                while i < oc.len() && oc[i] < c {
                    i += 1;
                }
                if i == oc.len() || oc[i] != c {
                    return false;
                }
            }
        }
        true
    }

    /// Matrix-market coordinate text, 1-based indices.
    pub fn to_matrix_market(&self) -> String {
        let mut s = String::new();
        s.push_str("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(s, "{} {} {}", self.nrows, self.ncols, self.nnz());
        for r in 0..self.nrows {
            let (rc, rv) = self.row(r);
            for (c, v) in rc.iter().zip(rv) {
                let _ = writeln!(s, "{} {} {:.16e}", r + 1, c + 1, v);
            }
        }
        s
    }

    pub fn from_dense(m: &DMatrix<f64>, block_index: Vec<(usize, usize)>) -> SparseOperator {
        let mut b = Builder::new(m.nrows(), m.ncols());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)] != 0.0 {
                    b.push(r, c, m[(r, c)]);
                }
            }
        }
        b.build(block_index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SparseOperator {
        let mut b = Builder::new(3, 3);
        b.push(0, 0, 2.0);
        b.push(0, 2, 1.0);
        b.push(1, 1, 3.0);
        b.push(2, 0, 1.0);
        b.push(2, 2, 4.0);
        b.push(0, 2, 0.5); // duplicate, summed
        b.build(vec![(0, 3)])
    }

    #[test]
    fn builder_merges_and_sorts() {
        let a = sample();
        assert_eq!(a.nnz(), 5);
        assert_eq!(a.get(0, 2), 1.5);
        assert!(a.cols[a.row_ptr[0]..a.row_ptr[1]]
            .windows(2)
            .all(|w| w[0] < w[1]));
    }

    #[test]
    fn drop_tolerance_removes_fill() {
        let mut b = Builder::new(1, 3);
        b.push(0, 0, 1.0);
        b.push(0, 1, 1e-20);
        b.push(0, 2, 1.0);
        b.push(0, 2, -1.0); // cancels exactly
        let a = b.build(vec![(0, 1)]);
        assert_eq!(a.nnz(), 1);
    }

    #[test]
    fn transpose_round_trip() {
        let a = sample();
        let att = a.transpose().transpose();
        assert_eq!(a.cols, att.cols);
        assert_eq!(a.vals, att.vals);
    }

    #[test]
    fn multiply_matches_dense() {
        let a = sample();
        let prod = a.multiply(&a.transpose());
        let dense = a.to_dense() * a.to_dense().transpose();
        assert_eq!(prod.to_dense(), dense);
    }

    #[test]
    fn pattern_hash_ignores_values_sees_structure() {
        let a = sample();
        let mut scaled = a.clone();
        scaled.vals.iter_mut().for_each(|v| *v *= 7.0);
        assert_eq!(a.pattern_hash(), scaled.pattern_hash());
        let mut b = Builder::new(3, 3);
        b.push(0, 1, 1.0);
        assert_ne!(a.pattern_hash(), b.build(vec![(0, 3)]).pattern_hash());
    }

    #[test]
    fn subset_detection() {
        let a = sample();
        let mut b = Builder::new(3, 3);
        b.push(0, 0, 9.0);
        b.push(1, 1, 9.0);
        let small = b.build(vec![(0, 3)]);
        assert!(small.pattern_subset_of(&a));
        assert!(!a.pattern_subset_of(&small));
    }
}
