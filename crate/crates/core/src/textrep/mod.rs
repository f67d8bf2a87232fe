//! Vector representations of documents and meta-documents, and cosine
//! scoring against them.

mod embeddings;
mod lsa;
mod tfidf;
mod tokenize;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::corpus::SparseMatrix;
use crate::error::{Error, Result};

pub use embeddings::{load_embeddings, parse_embeddings, write_embeddings};
pub use lsa::{lsa, lsa_with, truncated_svd, LsaOptions, TruncatedSvd, DEFAULT_LSA_DIM};
pub use tfidf::{tfidf, Vocabulary};
pub use tokenize::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RepresentationKind {
    Tfidf,
    Lsa,
    External,
}

#[derive(Debug, Clone)]
enum Vectors {
    /// Row-major `n_entities x dim`.
    Dense(Vec<f64>),
    Sparse(SparseMatrix),
}

/// Borrowed view of one vector.
#[derive(Debug, Clone, Copy)]
pub enum RowRef<'a> {
    Dense(&'a [f64]),
    Sparse { indices: &'a [usize], values: &'a [f64] },
}

impl RowRef<'_> {
    pub fn norm(&self) -> f64 {
        let v = match self {
            RowRef::Dense(v) => v,
            RowRef::Sparse { values, .. } => values,
        };
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        match *self {
            RowRef::Dense(v) => v.to_vec(),
            RowRef::Sparse { indices, values } => {
                let mut out = vec![0.0; dim];
                for (&i, &v) in indices.iter().zip(values) {
                    out[i] = v;
                }
                out
            }
        }
    }
}

/// A matrix with one vector per entity (document, candidate, or both).
///
/// tf-idf vectors are stored sparsely; LSA and external embeddings are
/// dense. Rows may be zero but never contain NaN or infinities.
#[derive(Debug)]
pub struct Representation {
    kind: RepresentationKind,
    n_entities: usize,
    dim: usize,
    vectors: Vectors,
    norms: Vec<f64>,
    // column-major copy for sparse query scoring, built on first use
    columns: OnceLock<SparseMatrix>,
}

impl Clone for Representation {
    fn clone(&self) -> Self {
        Representation {
            kind: self.kind,
            n_entities: self.n_entities,
            dim: self.dim,
            vectors: self.vectors.clone(),
            norms: self.norms.clone(),
            columns: OnceLock::new(),
        }
    }
}

impl Representation {
    pub fn dense(kind: RepresentationKind, n_entities: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_entities * dim {
            return Err(Error::Dimension {
                context: format!("dense representation {n_entities}x{dim}"),
                expected: n_entities * dim,
                found: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!(
                "non-finite value in row {} of representation",
                pos / dim.max(1)
            )));
        }
        let norms = if dim == 0 {
            vec![0.0; n_entities]
        } else {
            data.chunks(dim).map(|r| RowRef::Dense(r).norm()).collect()
        };
        Ok(Representation {
            kind,
            n_entities,
            dim,
            vectors: Vectors::Dense(data),
            norms,
            columns: OnceLock::new(),
        })
    }

    /// Dense representation from one vector per entity.
    pub fn from_rows(kind: RepresentationKind, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::Dimension {
                context: format!("row {i} of representation"),
                expected: dim,
                found: r.len(),
            });
        }
        Self::dense(kind, rows.len(), dim, rows.concat())
    }

    pub fn sparse(kind: RepresentationKind, matrix: SparseMatrix) -> Self {
        let norms = (0..matrix.n_rows())
            .map(|r| {
                let (indices, values) = matrix.row(r);
                RowRef::Sparse { indices, values }.norm()
            })
            .collect();
        Representation {
            kind,
            n_entities: matrix.n_rows(),
            dim: matrix.n_cols(),
            vectors: Vectors::Sparse(matrix),
            norms,
            columns: OnceLock::new(),
        }
    }

    pub fn kind(&self) -> RepresentationKind {
        self.kind
    }

    pub fn n_entities(&self) -> usize {
        self.n_entities
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.vectors, Vectors::Sparse(_))
    }

    pub fn row(&self, i: usize) -> RowRef<'_> {
        match &self.vectors {
            Vectors::Dense(data) => RowRef::Dense(&data[i * self.dim..(i + 1) * self.dim]),
            Vectors::Sparse(m) => {
                let (indices, values) = m.row(i);
                RowRef::Sparse { indices, values }
            }
        }
    }

    pub fn row_dense(&self, i: usize) -> Vec<f64> {
        self.row(i).to_dense(self.dim)
    }

    pub fn norm(&self, i: usize) -> f64 {
        self.norms[i]
    }

    pub(crate) fn sparse_matrix(&self) -> Option<&SparseMatrix> {
        match &self.vectors {
            Vectors::Sparse(m) => Some(m),
            Vectors::Dense(_) => None,
        }
    }

    pub(crate) fn dense_data(&self) -> Option<&[f64]> {
        match &self.vectors {
            Vectors::Dense(d) => Some(d),
            Vectors::Sparse(_) => None,
        }
    }

    /// Inner product of `query` with every row.
    pub fn dot_all(&self, query: RowRef<'_>) -> Vec<f64> {
        let mut out = vec![0.0; self.n_entities];
        match (&self.vectors, query) {
            (Vectors::Sparse(m), RowRef::Sparse { indices, values }) => {
                let cols = self.columns.get_or_init(|| m.transpose());
                for (&t, &qv) in indices.iter().zip(values) {
                    let (rows, vals) = cols.row(t);
                    for (&r, &v) in rows.iter().zip(vals) {
                        out[r] += qv * v;
                    }
                }
            }
            (Vectors::Sparse(m), RowRef::Dense(q)) => {
                for (r, o) in out.iter_mut().enumerate() {
                    let (idx, vals) = m.row(r);
                    *o = idx.iter().zip(vals).map(|(&c, &v)| q[c] * v).sum();
                }
            }
            (Vectors::Dense(data), RowRef::Dense(q)) => {
                for (o, row) in out.iter_mut().zip(data.chunks(self.dim.max(1))) {
                    *o = row.iter().zip(q).map(|(a, b)| a * b).sum();
                }
            }
            (Vectors::Dense(data), RowRef::Sparse { indices, values }) => {
                for (r, o) in out.iter_mut().enumerate() {
                    let row = &data[r * self.dim..(r + 1) * self.dim];
                    *o = indices.iter().zip(values).map(|(&c, &v)| row[c] * v).sum();
                }
            }
        }
        out
    }

    /// Cosine similarity of `query` with every row (0 where a norm is 0).
    pub fn cosine_all(&self, query: RowRef<'_>) -> Result<Vec<f64>> {
        let qdim = match query {
            RowRef::Dense(q) => Some(q.len()),
            RowRef::Sparse { indices, .. } => {
                if indices.iter().any(|&i| i >= self.dim) {
                    None
                } else {
                    Some(self.dim)
                }
            }
        };
        if qdim != Some(self.dim) {
            return Err(Error::Dimension {
                context: "cosine query".into(),
                expected: self.dim,
                found: qdim.unwrap_or(usize::MAX),
            });
        }
        let qn = query.norm();
        let mut scores = self.dot_all(query);
        for (s, &n) in scores.iter_mut().zip(&self.norms) {
            *s = if qn == 0.0 || n == 0.0 {
                0.0
            } else {
                (*s / (qn * n)).clamp(-1.0, 1.0)
            };
        }
        Ok(scores)
    }

    /// Cosine of entity `i` against every entity, itself included.
    pub fn cosine_to_row(&self, i: usize) -> Vec<f64> {
        self.cosine_all(self.row(i)).expect("row of the same representation")
    }
}

/// `<q, v_i> / (|q| |v_i|)` for every row `v_i`; 0 when either norm is 0.
pub fn cosine_scores(query: &[f64], rep: &Representation) -> Result<Vec<f64>> {
    rep.cosine_all(RowRef::Dense(query))
}

/// Cosine similarity of two dense vectors; 0 when either is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}
