//! Sparse Hermitian matrices in compressed-row form.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Anything that can multiply a vector by a Hermitian matrix.
pub trait HermitianOp: Sync {
    fn dim(&self) -> usize;
    /// `y = A x`.
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);
}

/// Block layout of an extension: `n` vertices, each carrying `r` colours.
/// Scalar index of `(vertex, colour)` is `vertex * r + colour`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockShape {
    pub n: usize,
    pub r: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseHermitianOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
    blocks: Option<BlockShape>,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

impl SparseHermitianOperator {
    /// Sorts by `(row, col)`, merges duplicates and replaces each entry by
    /// `(a_ij + conj(a_ji)) / 2`, so the result is Hermitian to the last bit.
    /// The triplets describe the whole matrix, both triangles.
    pub fn from_triplets(dim: usize, triplets: Vec<(usize, usize, Complex64)>) -> Self {
        let mut all = Vec::with_capacity(2 * triplets.len());
        for (i, j, v) in triplets {
            assert!(i < dim && j < dim, "triplet ({i}, {j}) outside dimension {dim}");
            all.push((i, j, v * 0.5));
            all.push((j, i, v.conj() * 0.5));
        }
        Self::from_sorted_merge(dim, all)
    }

    /// Builds from triplets that are already Hermitian as a multiset; no averaging.
    pub fn from_hermitian_triplets(dim: usize, triplets: Vec<(usize, usize, Complex64)>) -> Self {
        Self::from_sorted_merge(dim, triplets)
    }

    fn from_sorted_merge(dim: usize, mut all: Vec<(usize, usize, Complex64)>) -> Self {
        all.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(all.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(all.len());
        let mut rows = Vec::with_capacity(all.len());
        for (i, j, v) in all {
            if rows.last() == Some(&i) && cols.last() == Some(&j) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(i);
                cols.push(j);
                vals.push(v);
            }
        }
        let keep: Vec<bool> = vals.iter().map(|v| *v != ZERO).collect();
        let mut c2 = Vec::with_capacity(cols.len());
        let mut v2 = Vec::with_capacity(vals.len());
        for k in 0..cols.len() {
            if keep[k] {
                row_ptr[rows[k] + 1] += 1;
                c2.push(cols[k]);
                v2.push(vals[k]);
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { dim, row_ptr, cols: c2, vals: v2, blocks: None }
    }

    pub fn from_dense(a: &DMatrix<Complex64>) -> Self {
        assert_eq!(a.nrows(), a.ncols());
        let mut t = Vec::new();
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                if a[(i, j)] != ZERO {
                    t.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(a.nrows(), t)
    }

    pub fn from_real_dense(a: &DMatrix<f64>) -> Self {
        Self::from_dense(&a.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn with_blocks(mut self, blocks: BlockShape) -> Self {
        assert_eq!(blocks.n * blocks.r, self.dim);
        self.blocks = Some(blocks);
        self
    }

    pub fn blocks(&self) -> Option<BlockShape> {
        self.blocks
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[range.clone()].binary_search(&j) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => ZERO,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.entry(i, i).re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v = -*v);
        out
    }

    /// Exact check: `entry(j, i) == conj(entry(i, j))` for every stored entry.
    pub fn is_hermitian(&self) -> bool {
        (0..self.dim).all(|i| self.row(i).all(|(j, v)| self.entry(j, i) == v.conj()))
    }

    /// Largest absolute row sum, an upper bound on the operator norm.
    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Whether every stored value has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.vals.iter().all(|v| v.im == 0.0)
    }

    /// MatrixMarket coordinate text, 1-based indices, every stored entry listed.
    pub fn write_matrix_market<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let real = self.is_real();
        let field = if real { "real" } else { "complex" };
        writeln!(out, "%%MatrixMarket matrix coordinate {field} general")?;
        writeln!(out, "{} {} {}", self.dim, self.dim, self.nnz())?;
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                if real {
                    writeln!(out, "{} {} {:?}", i + 1, j + 1, v.re)?;
                } else {
                    writeln!(out, "{} {} {:?} {:?}", i + 1, j + 1, v.re, v.im)?;
                }
            }
        }
        Ok(())
    }
}

impl HermitianOp for SparseHermitianOperator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.dim) {
            let mut acc = ZERO;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yi = acc;
        }
    }
}

/// `A + diag(shift)` without copying `A`.
pub struct Shifted<'a, O: HermitianOp> {
    pub op: &'a O,
    pub shift: Vec<f64>,
}

impl<'a, O: HermitianOp> Shifted<'a, O> {
    pub fn new(op: &'a O, shift: Vec<f64>) -> Self {
        assert_eq!(shift.len(), op.dim());
        Self { op, shift }
    }
}

impl<O: HermitianOp> HermitianOp for Shifted<'_, O> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.op.apply(x, y);
        for ((yi, xi), s) in y.iter_mut().zip(x).zip(&self.shift) {
            *yi += xi * *s;
        }
    }
}

/// Diagonal of `Id_n ⊗ diag(zeta)` for an `(n, r)` block layout.
pub fn tile_shift(zeta: &[f64], n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n * zeta.len());
    for _ in 0..n {
        out.extend_from_slice(zeta);
    }
    out
}

/// `-A` as an operator, without copying.
pub struct Negated<'a, O: HermitianOp>(pub &'a O);

impl<O: HermitianOp> HermitianOp for Negated<'_, O> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.0.apply(x, y);
        y.iter_mut().for_each(|v| *v = -*v);
    }
}
