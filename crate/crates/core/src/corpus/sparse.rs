//! Compressed sparse row storage for nonnegative count and weight matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CSR matrix with nonnegative values.
///
/// Column indices within a row are strictly increasing, so there are no
/// duplicate `(row, col)` pairs. Explicit zeros are never stored by the
/// constructors in this module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from raw CSR arrays, checking every structural invariant.
    pub fn from_csr(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != n_rows + 1 {
            return Err(Error::Matrix(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                n_rows + 1
            )));
        }
        if row_offsets[0] != 0 {
            return Err(Error::Matrix("row_offsets must start at 0".into()));
        }
        if col_indices.len() != values.len() {
            return Err(Error::Matrix(format!(
                "{} column indices but {} values",
                col_indices.len(),
                values.len()
            )));
        }
        if *row_offsets.last().unwrap() != values.len() {
            return Err(Error::Matrix(format!(
                "last row offset {} does not equal stored value count {}",
                row_offsets.last().unwrap(),
                values.len()
            )));
        }
        for (row, w) in row_offsets.windows(2).enumerate() {
            if w[1] < w[0] {
                return Err(Error::Matrix(format!("row_offsets decreases at row {row}")));
            }
            let cols = &col_indices[w[0]..w[1]];
            for (k, &c) in cols.iter().enumerate() {
                if c >= n_cols {
                    return Err(Error::Matrix(format!(
                        "column {c} out of range in row {row} (n_cols = {n_cols})"
                    )));
                }
                if k > 0 && cols[k - 1] >= c {
                    return Err(Error::Matrix(format!(
                        "columns in row {row} are not strictly increasing (duplicate or unsorted entry)"
                    )));
                }
            }
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Matrix(format!("value {v} is negative or not finite")));
        }
        Ok(SparseMatrix {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds a matrix from `(row, col, value)` triplets in any order.
    ///
    /// Duplicate coordinates are summed and zero results are dropped.
    pub fn from_triplets<I>(n_rows: usize, n_cols: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut entries: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        for &(r, c, v) in &entries {
            if r >= n_rows || c >= n_cols {
                return Err(Error::Matrix(format!(
                    "entry ({r}, {c}) outside a {n_rows}x{n_cols} matrix"
                )));
            }
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Matrix(format!("entry ({r}, {c}) has invalid value {v}")));
            }
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));

        let mut row_offsets = vec![0usize; n_rows + 1];
        let mut col_indices = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(c);
                values.push(v);
                rows.push(r);
                last = Some((r, c));
            }
        }
        // drop entries that are exactly zero after summation
        let mut keep_cols = Vec::with_capacity(col_indices.len());
        let mut keep_vals = Vec::with_capacity(values.len());
        for ((r, c), v) in rows.into_iter().zip(col_indices).zip(values) {
            if v != 0.0 {
                row_offsets[r + 1] += 1;
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for i in 0..n_rows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Ok(SparseMatrix {
            n_rows,
            n_cols,
            row_offsets,
            col_indices: keep_cols,
            values: keep_vals,
        })
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        SparseMatrix {
            n_rows,
            n_cols,
            row_offsets: vec![0; n_rows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds a matrix from a dense row-major table, keeping nonzero entries.
    pub fn from_dense(rows: &[Vec<f64>], n_cols: usize) -> Result<Self> {
        let mut triplets = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::Dimension {
                    context: format!("dense row {r}"),
                    expected: n_cols,
                    found: row.len(),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((r, c, v));
                }
            }
        }
        Self::from_triplets(rows.len(), n_cols, triplets)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of one row.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_offsets[r], self.row_offsets[r + 1]);
        (&self.col_indices[a..b], &self.values[a..b])
    }

    pub fn row_nnz(&self, r: usize) -> usize {
        self.row_offsets[r + 1] - self.row_offsets[r]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// Iterates over stored `(row, col, value)` entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.row(r).1.iter().sum()).collect()
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for i in 0..self.n_cols {
            counts[i + 1] += counts[i];
        }
        let row_offsets = counts.clone();
        let mut next = counts;
        let mut col_indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        // rows are visited in increasing order, so each output row stays sorted
        for (r, c, v) in self.triplets() {
            let slot = next[c];
            col_indices[slot] = r;
            values[slot] = v;
            next[c] += 1;
        }
        SparseMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.n_cols != other.n_rows {
            return Err(Error::Dimension {
                context: "sparse matmul inner dimension".into(),
                expected: self.n_cols,
                found: other.n_rows,
            });
        }
        let mut row_offsets = Vec::with_capacity(self.n_rows + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        let mut acc = vec![0.0f64; other.n_cols];
        let mut touched = vec![false; other.n_cols];
        let mut pattern: Vec<usize> = Vec::new();
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&k, &a) in cols.iter().zip(vals) {
                let (ocols, ovals) = other.row(k);
                for (&c, &b) in ocols.iter().zip(ovals) {
                    if !touched[c] {
                        touched[c] = true;
                        pattern.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            pattern.sort_unstable();
            for &c in &pattern {
                if acc[c] != 0.0 {
                    col_indices.push(c);
                    values.push(acc[c]);
                }
                acc[c] = 0.0;
                touched[c] = false;
            }
            pattern.clear();
            row_offsets.push(col_indices.len());
        }
        Ok(SparseMatrix {
            n_rows: self.n_rows,
            n_cols: other.n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    fn merge_with(&self, other: &SparseMatrix, op: impl Fn(f64, f64) -> f64, what: &str) -> Result<SparseMatrix> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(Error::Dimension {
                context: format!("{what} of {}x{} and {}x{}", self.n_rows, self.n_cols, other.n_rows, other.n_cols),
                expected: self.n_rows * self.n_cols,
                found: other.n_rows * other.n_cols,
            });
        }
        let mut row_offsets = Vec::with_capacity(self.n_rows + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.n_rows {
            let (ac, av) = self.row(r);
            let (bc, bv) = other.row(r);
            let (mut i, mut j) = (0, 0);
            while i < ac.len() || j < bc.len() {
                let (c, v) = if j == bc.len() || (i < ac.len() && ac[i] < bc[j]) {
                    i += 1;
                    (ac[i - 1], op(av[i - 1], 0.0))
                } else if i == ac.len() || bc[j] < ac[i] {
                    j += 1;
                    (bc[j - 1], op(0.0, bv[j - 1]))
                } else {
                    i += 1;
                    j += 1;
                    (ac[i - 1], op(av[i - 1], bv[j - 1]))
                };
                if v != 0.0 {
                    col_indices.push(c);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(SparseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn add(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        self.merge_with(other, |a, b| a + b, "sum")
    }

    pub fn elementwise_max(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        self.merge_with(other, f64::max, "elementwise max")
    }

    /// `max(M, M^T)` entrywise. Requires a square matrix.
    pub fn symmetrize_max(&self) -> Result<SparseMatrix> {
        if self.n_rows != self.n_cols {
            return Err(Error::Dimension {
                context: "symmetrization of a non-square matrix".into(),
                expected: self.n_rows,
                found: self.n_cols,
            });
        }
        self.elementwise_max(&self.transpose())
    }

    pub fn is_symmetric(&self) -> bool {
        self.n_rows == self.n_cols && *self == self.transpose()
    }

    /// Assembles a 2x2 block matrix `[[a, b], [c, d]]`.
    pub fn block2x2(a: &SparseMatrix, b: &SparseMatrix, c: &SparseMatrix, d: &SparseMatrix) -> Result<SparseMatrix> {
        let check = |ctx: &str, expected: usize, found: usize| {
            if expected != found {
                Err(Error::Dimension {
                    context: format!("block layout: {ctx}"),
                    expected,
                    found,
                })
            } else {
                Ok(())
            }
        };
        check("rows of top-right block", a.n_rows, b.n_rows)?;
        check("rows of bottom-right block", c.n_rows, d.n_rows)?;
        check("cols of bottom-left block", a.n_cols, c.n_cols)?;
        check("cols of bottom-right block", b.n_cols, d.n_cols)?;

        let n_rows = a.n_rows + c.n_rows;
        let n_cols = a.n_cols + b.n_cols;
        let mut row_offsets = Vec::with_capacity(n_rows + 1);
        row_offsets.push(0);
        let nnz = a.nnz() + b.nnz() + c.nnz() + d.nnz();
        let mut col_indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        let shift = a.n_cols;
        for (left, right) in [(a, b), (c, d)] {
            for r in 0..left.n_rows {
                let (lc, lv) = left.row(r);
                col_indices.extend_from_slice(lc);
                values.extend_from_slice(lv);
                let (rc, rv) = right.row(r);
                col_indices.extend(rc.iter().map(|&x| x + shift));
                values.extend_from_slice(rv);
                row_offsets.push(col_indices.len());
            }
        }
        Ok(SparseMatrix {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Keeps only the first `n` rows.
    pub fn truncate_rows(&self, n: usize) -> SparseMatrix {
        let n = n.min(self.n_rows);
        let end = self.row_offsets[n];
        SparseMatrix {
            n_rows: n,
            n_cols: self.n_cols,
            row_offsets: self.row_offsets[..=n].to_vec(),
            col_indices: self.col_indices[..end].to_vec(),
            values: self.values[..end].to_vec(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (r, c, v) in self.triplets() {
            out[r][c] = v;
        }
        out
    }
}
