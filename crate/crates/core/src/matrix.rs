//! Compressed sparse matrix with both row and column access.

use crate::error::{Error, Result};

/// A real matrix stored in CSR order with a CSC index on the side.
///
/// Explicit zeros are dropped at construction, so "support" always means
/// structurally nonzero entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    col_ptr: Vec<usize>,
    csc_rows: Vec<usize>,
    csc_values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` triplets. Duplicate positions are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            if i >= rows || j >= cols {
                return Err(Error::InvalidArgument(format!(
                    "entry ({i}, {j}) outside a {rows}x{cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite("matrix entry"));
            }
            entries.push((i, j, v));
        }
        entries.sort_by_key(|e| (e.0, e.1));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for (i, j, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        merged.retain(|e| e.2 != 0.0);

        let mut row_ptr = vec![0usize; rows + 1];
        for &(i, _, _) in &merged {
            row_ptr[i + 1] += 1;
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx: Vec<usize> = merged.iter().map(|e| e.1).collect();
        let values: Vec<f64> = merged.iter().map(|e| e.2).collect();

        let mut col_ptr = vec![0usize; cols + 1];
        for &(_, j, _) in &merged {
            col_ptr[j + 1] += 1;
        }
        for j in 0..cols {
            col_ptr[j + 1] += col_ptr[j];
        }
        let mut fill = col_ptr.clone();
        let mut csc_rows = vec![0usize; merged.len()];
        let mut csc_values = vec![0.0; merged.len()];
        for &(i, j, v) in &merged {
            let slot = fill[j];
            csc_rows[slot] = i;
            csc_values[slot] = v;
            fill[j] += 1;
        }

        Ok(Self { rows, cols, row_ptr, col_idx, values, col_ptr, csc_rows, csc_values })
    }

    /// Builds from a row-major dense buffer.
    pub fn from_dense(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "dense buffer has {} entries, expected {}",
                data.len(),
                rows * cols
            )));
        }
        let triplets: Vec<_> = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, data[i * cols + j]))
            .collect();
        Self::from_triplets(rows, cols, &triplets)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_dense(n, d, &flat)
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

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    /// Row indices and values of column `j`.
    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.csc_rows[r.clone()], &self.csc_values[r])
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn col_nnz(&self, j: usize) -> usize {
        self.col_ptr[j + 1] - self.col_ptr[j]
    }

    /// Entries in CSR order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |p| vals[p])
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum()
            })
            .collect()
    }

    /// `Aᵀ y`.
    pub fn tmul_vec(&self, y: &[f64]) -> Vec<f64> {
        (0..self.cols)
            .map(|j| {
                let (rows, vals) = self.col(j);
                rows.iter().zip(vals).map(|(&i, &v)| v * y[i]).sum()
            })
            .collect()
    }

    pub fn row_inf_norm(&self, i: usize) -> f64 {
        self.row(i).1.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn col_inf_norm(&self, j: usize) -> f64 {
        self.col(j).1.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut out = nalgebra::DMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.iter() {
            out[(i, j)] = v;
        }
        out
    }

    /// Spectral norm by power iteration on `AᵀA`.
    pub fn spectral_norm(&self) -> f64 {
        if self.nnz() == 0 {
            return 0.0;
        }
        let mut v: Vec<f64> = (0..self.cols).map(|j| 1.0 + (j % 7) as f64 * 0.01).collect();
        let mut sigma = 0.0;
        for _ in 0..500 {
            let av = self.mul_vec(&v);
            let w = self.tmul_vec(&av);
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            let next = norm.sqrt();
            v.iter_mut().zip(&w).for_each(|(vi, wi)| *vi = wi / norm);
            if (next - sigma).abs() <= 1e-13 * next {
                sigma = next;
                break;
            }
            sigma = next;
        }
        sigma
    }
}
