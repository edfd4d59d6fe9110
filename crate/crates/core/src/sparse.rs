//! Sparse and dense matrices plus the handful of products the graph models need.
//!
//! Every reduction runs left to right in index order, so results are bitwise
//! reproducible for identical inputs.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
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

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(format!(
                "buffer of length {} cannot form a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::numeric(format!("non-finite matrix entry {v}")));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equally long rows. An empty slice gives a 0x0 matrix.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::shape(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(rows.len(), cols, data)
    }

    pub fn column(values: &[f64]) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::shape(format!(
                "element-wise op on {:?} and {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// `self += other`, shapes must agree.
    pub fn add_assign(&mut self, other: &Self) {
        debug_assert_eq!(self.shape(), other.shape());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// Dense product `self · other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::shape(format!("matmul {:?} x {:?}", self.shape(), other.shape())));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self · otherᵀ`.
    pub fn matmul_transposed(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::shape(format!(
                "matmul_transposed {:?} x {:?}ᵀ",
                self.shape(),
                other.shape()
            )));
        }
        let mut out = Self::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            for j in 0..other.rows {
                let b = other.row(j);
                let mut acc = 0.0;
                for (x, y) in a.iter().zip(b) {
                    acc += x * y;
                }
                out.data[i * other.rows + j] = acc;
            }
        }
        Ok(out)
    }

    /// `selfᵀ · other`.
    pub fn transposed_matmul(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::shape(format!(
                "transposed_matmul {:?}ᵀ x {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let mut out = Self::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let b_row = other.row(k);
            for i in 0..self.cols {
                let a = self.data[k * self.cols + i];
                if a == 0.0 {
                    continue;
                }
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Copies the first `n` rows.
    pub fn top_rows(&self, n: usize) -> Result<Self> {
        if n > self.rows {
            return Err(Error::shape(format!(
                "cannot take {n} rows of a {}-row matrix",
                self.rows
            )));
        }
        Ok(Self {
            rows: n,
            cols: self.cols,
            data: self.data[..n * self.cols].to_vec(),
        })
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut out = Self::zeros(idx.len(), self.cols);
        for (o, &i) in idx.iter().enumerate() {
            out.row_mut(o).copy_from_slice(self.row(i));
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Sparse matrix in compressed sparse row layout, built from coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` triplets in any order.
    ///
    /// Out-of-range indices, non-finite values and repeated coordinates are
    /// rejected. Explicit zeros are kept as stored entries.
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(r, c, v) in &triplets {
            if r >= rows || c >= cols {
                return Err(Error::shape(format!("entry ({r}, {c}) outside a {rows}x{cols} matrix")));
            }
            if !v.is_finite() {
                return Err(Error::numeric(format!("non-finite entry {v} at ({r}, {c})")));
            }
        }
        triplets.sort_by_key(|t| (t.0, t.1));
        if let Some(w) = triplets.windows(2).find(|w| w[0].0 == w[1].0 && w[0].1 == w[1].1) {
            return Err(Error::data(format!("duplicate coordinate ({}, {})", w[0].0, w[0].1)));
        }
        let mut row_ptr = vec![0usize; rows + 1];
        for &(r, _, _) in &triplets {
            row_ptr[r + 1] += 1;
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let (col_idx, values) = triplets.into_iter().map(|(_, c, v)| (c, v)).unzip();
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
            symmetric: false,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
            symmetric: rows == cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
            symmetric: true,
        }
    }

    pub fn from_dense(m: &DenseMatrix) -> Self {
        let mut t = Vec::new();
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                let v = m.get(r, c);
                if v != 0.0 {
                    t.push((r, c, v));
                }
            }
        }
        // Dense input is finite and coordinates are unique by construction.
        Self::from_triplets(m.rows(), m.cols(), t).expect("dense matrix converts")
    }

    /// Marks the matrix as symmetric after checking every entry against its mirror.
    pub fn with_symmetric_flag(mut self) -> Result<Self> {
        if !self.is_symmetric() {
            return Err(Error::data("matrix flagged symmetric is not symmetric"));
        }
        self.symmetric = true;
        Ok(self)
    }

    pub fn symmetric_flag(&self) -> bool {
        self.symmetric
    }

    /// Entry-wise symmetry test (exact equality).
    pub fn is_symmetric(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        self.iter().all(|(r, c, v)| self.get(c, r) == v)
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

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Entries of row `r` as `(col, value)` pairs in column order.
    pub fn row_entries(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// All stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| self.row_entries(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.iter() {
            d.set(r, c, v);
        }
        d
    }

    pub fn transpose(&self) -> Self {
        let t = self.iter().map(|(r, c, v)| (c, r, v)).collect();
        let mut out = Self::from_triplets(self.cols, self.rows, t).expect("transpose is valid");
        out.symmetric = self.symmetric;
        out
    }

    /// Row sums, accumulated left to right.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|r| self.row_entries(r).map(|(_, v)| v).sum())
            .collect()
    }

    /// Matrix Market coordinate format (`real general` or `real symmetric`
    /// headers are not distinguished: all entries are written).
    pub fn to_matrix_market(&self) -> String {
        let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(s, "{} {} {}", self.rows, self.cols, self.nnz());
        for (r, c, v) in self.iter() {
            let _ = writeln!(s, "{} {} {:e}", r + 1, c + 1, v);
        }
        s
    }

    pub fn from_matrix_market(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('%'));
        let header = lines
            .next()
            .ok_or_else(|| Error::data("matrix market text has no size line"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::data(format!("bad size line `{header}`"))))
            .collect::<Result<_>>()?;
        let [rows, cols, nnz] = dims[..] else {
            return Err(Error::data(format!("bad size line `{header}`")));
        };
        let mut t = Vec::with_capacity(nnz);
        for line in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::data(format!("bad entry line `{line}`"));
            if parts.len() != 3 {
                return Err(bad());
            }
            let r: usize = parts[0].parse().map_err(|_| bad())?;
            let c: usize = parts[1].parse().map_err(|_| bad())?;
            let v: f64 = parts[2].parse().map_err(|_| bad())?;
            if r == 0 || c == 0 {
                return Err(bad());
            }
            t.push((r - 1, c - 1, v));
        }
        if t.len() != nnz {
            return Err(Error::data(format!("expected {nnz} entries, found {}", t.len())));
        }
        Self::from_triplets(rows, cols, t)
    }
}

/// Sparse-dense product `a · x`.
pub fn spmm(a: &SparseMatrix, x: &DenseMatrix) -> Result<DenseMatrix> {
    if a.cols() != x.rows() {
        return Err(Error::shape(format!(
            "spmm {}x{} by {:?}",
            a.rows(),
            a.cols(),
            x.shape()
        )));
    }
    let mut out = DenseMatrix::zeros(a.rows(), x.cols());
    for r in 0..a.rows() {
        let out_row = out.row_mut(r);
        for (c, v) in a.row_entries(r) {
            for (o, &xv) in out_row.iter_mut().zip(x.row(c)) {
                *o += v * xv;
            }
        }
    }
    Ok(out)
}

/// `aᵀ · g` without materialising the transpose.
pub fn spmm_transposed(a: &SparseMatrix, g: &DenseMatrix) -> Result<DenseMatrix> {
    if a.rows() != g.rows() {
        return Err(Error::shape(format!(
            "spmm_transposed {}x{}ᵀ by {:?}",
            a.rows(),
            a.cols(),
            g.shape()
        )));
    }
    if a.symmetric_flag() {
        return spmm(a, g);
    }
    let mut out = DenseMatrix::zeros(a.cols(), g.cols());
    for r in 0..a.rows() {
        let g_row = g.row(r);
        for (c, v) in a.row_entries(r) {
            for (o, &gv) in out.row_mut(c).iter_mut().zip(g_row) {
                *o += v * gv;
            }
        }
    }
    Ok(out)
}

/// Symmetric GCN normalisation `D^{-1/2} (A + I) D^{-1/2}` where `D` holds the
/// row sums of `A + I`.
///
/// Requires a square matrix with non-negative entries. The symmetric flag of
/// the output is set whenever the input is symmetric.
pub fn normalize_adjacency(a: &SparseMatrix) -> Result<SparseMatrix> {
    if a.rows() != a.cols() {
        return Err(Error::shape(format!(
            "adjacency must be square, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if let Some((r, c, v)) = a.iter().find(|&(_, _, v)| v < 0.0) {
        return Err(Error::data(format!("negative adjacency weight {v} at ({r}, {c})")));
    }
    let n = a.rows();
    let mut with_loops = Vec::with_capacity(a.nnz() + n);
    for r in 0..n {
        let mut saw_diag = false;
        for (c, v) in a.row_entries(r) {
            if c == r {
                with_loops.push((r, c, v + 1.0));
                saw_diag = true;
            } else {
                with_loops.push((r, c, v));
            }
        }
        if !saw_diag {
            with_loops.push((r, r, 1.0));
        }
    }
    let a_hat = SparseMatrix::from_triplets(n, n, with_loops)?;
    let degree = a_hat.row_sums();
    let scaled = a_hat
        .iter()
        .map(|(r, c, v)| (r, c, v / (degree[r] * degree[c]).sqrt()))
        .collect();
    let mut out = SparseMatrix::from_triplets(n, n, scaled)?;
    out.symmetric = a.symmetric_flag() || a.is_symmetric();
    Ok(out)
}

/// Horizontal concatenation `[b0 | b1 | …]`.
pub fn concat_cols(blocks: &[&DenseMatrix]) -> Result<DenseMatrix> {
    let Some(first) = blocks.first() else {
        return Err(Error::shape("concat_cols needs at least one block"));
    };
    let rows = first.rows();
    if let Some(b) = blocks.iter().find(|b| b.rows() != rows) {
        return Err(Error::shape(format!(
            "concat_cols row mismatch: {} vs {rows}",
            b.rows()
        )));
    }
    let cols: usize = blocks.iter().map(|b| b.cols()).sum();
    let mut out = DenseMatrix::zeros(rows, cols);
    for r in 0..rows {
        let mut offset = 0;
        let row = out.row_mut(r);
        for b in blocks {
            row[offset..offset + b.cols()].copy_from_slice(b.row(r));
            offset += b.cols();
        }
    }
    Ok(out)
}
