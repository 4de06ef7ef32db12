//! Small sparse matrix types used by the assembly and the solver.

use std::io::Write;

use nalgebra::DMatrix;

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    /// Builds the matrix row by row; each row is a list of `(col, value)`
    /// with distinct columns.
    pub fn from_rows(ncols: usize, rows: &[Vec<(usize, f64)>]) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in rows {
            let mut sorted = row.clone();
            sorted.sort_by_key(|&(c, _)| c);
            for w in sorted.windows(2) {
                assert_ne!(w[0].0, w[1].0, "duplicate column in sparse row");
            }
            for (c, v) in sorted {
                assert!(c < ncols);
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Self { nrows: rows.len(), ncols, row_ptr, col_idx, values }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(col, value)` pairs of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.nrows);
        let mut out = vec![0.0; self.ncols];
        for (r, &yr) in y.iter().enumerate() {
            for (c, v) in self.row(r) {
                out[c] += v * yr;
            }
        }
        out
    }

    /// Triplets of `w * A^T A`, one outer product per row (duplicates not merged).
    pub fn gram_triplets(&self, w: f64, out: &mut Vec<(usize, usize, f64)>) {
        for r in 0..self.nrows {
            let range = self.row_ptr[r]..self.row_ptr[r + 1];
            for a in range.clone() {
                for b in range.clone() {
                    out.push((self.col_idx[a], self.col_idx[b], w * self.values[a] * self.values[b]));
                }
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    /// Writes `row col value` lines (0-based) preceded by a `nrows ncols nnz` header.
    pub fn write_triplets(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                writeln!(w, "{r} {c} {v:.17e}")?;
            }
        }
        Ok(())
    }
}

/// Matrix whose every row is supported inside one fixed-width column block.
///
/// Collocation rows only touch the B-coefficients of the triangle that owns
/// the collocation point, so this is the natural storage for `K` and `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockRowMatrix {
    ncols: usize,
    width: usize,
    blocks: Vec<usize>,
    values: Vec<f64>,
}

impl BlockRowMatrix {
    pub fn new(ncols: usize, width: usize) -> Self {
        assert!(width > 0 && ncols.is_multiple_of(width));
        Self { ncols, width, blocks: Vec::new(), values: Vec::new() }
    }

    pub fn push_row(&mut self, block: usize, row: &[f64]) {
        assert_eq!(row.len(), self.width);
        assert!((block + 1) * self.width <= self.ncols);
        self.blocks.push(block);
        self.values.extend_from_slice(row);
    }

    pub fn nrows(&self) -> usize {
        self.blocks.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn num_blocks(&self) -> usize {
        self.ncols / self.width
    }

    pub fn row_block(&self, r: usize) -> usize {
        self.blocks[r]
    }

    pub fn row_values(&self, r: usize) -> &[f64] {
        &self.values[r * self.width..(r + 1) * self.width]
    }

    /// Multiplies every entry by `s`.
    pub fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows())
            .map(|r| {
                let off = self.blocks[r] * self.width;
                self.row_values(r).iter().zip(&x[off..off + self.width]).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.nrows());
        let mut out = vec![0.0; self.ncols];
        for (r, &yr) in y.iter().enumerate() {
            let off = self.blocks[r] * self.width;
            for (o, v) in out[off..off + self.width].iter_mut().zip(self.row_values(r)) {
                *o += v * yr;
            }
        }
        out
    }

    /// Diagonal blocks of `A^T A`, each `width x width` row-major.
    pub fn gram_blocks(&self) -> Vec<Vec<f64>> {
        let w = self.width;
        let mut blocks = vec![vec![0.0; w * w]; self.num_blocks()];
        for r in 0..self.nrows() {
            let g = &mut blocks[self.blocks[r]];
            let row = self.row_values(r);
            for a in 0..w {
                let ra = row[a];
                if ra == 0.0 {
                    continue;
                }
                for b in 0..w {
                    g[a * w + b] += ra * row[b];
                }
            }
        }
        blocks
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows(), self.ncols);
        for r in 0..self.nrows() {
            let off = self.blocks[r] * self.width;
            for (a, v) in self.row_values(r).iter().enumerate() {
                m[(r, off + a)] = *v;
            }
        }
        m
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let rows: Vec<Vec<(usize, f64)>> = (0..self.nrows())
            .map(|r| {
                let off = self.blocks[r] * self.width;
                self.row_values(r).iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(a, v)| (off + a, *v)).collect()
            })
            .collect();
        CsrMatrix::from_rows(self.ncols, &rows)
    }
}

/// Max-norm of a vector (0 for an empty one).
pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
