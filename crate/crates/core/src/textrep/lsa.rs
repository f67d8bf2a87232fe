//! Latent semantic analysis: truncated SVD of a tf-idf matrix.
//!
//! Small matrices go through a dense SVD. Larger ones use a randomized
//! range finder with power iterations; only `n x l` and `dim x l` dense
//! blocks are materialized, `l = k + oversample`.

use log::warn;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Representation, RepresentationKind};
use crate::error::{Error, Result};

pub const DEFAULT_LSA_DIM: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LsaOptions {
    pub seed: u64,
    pub oversample: usize,
    pub power_iters: usize,
    /// Matrices with at most this many cells use the dense SVD.
    pub dense_limit: usize,
}

impl Default for LsaOptions {
    fn default() -> Self {
        LsaOptions {
            seed: 0,
            oversample: 12,
            power_iters: 4,
            dense_limit: 2_000_000,
        }
    }
}

/// Rank-`k` factorization `X ~ U diag(s) V^T`, singular values descending.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub vt: DMatrix<f64>,
}

impl TruncatedSvd {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (j, s) in self.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * &self.vt
    }
}

fn to_dense(rep: &Representation) -> DMatrix<f64> {
    let (n, d) = (rep.n_entities(), rep.dim());
    match (rep.dense_data(), rep.sparse_matrix()) {
        (Some(data), _) => DMatrix::from_row_slice(n, d, data),
        (None, Some(m)) => {
            let mut out = DMatrix::zeros(n, d);
            for (r, c, v) in m.triplets() {
                out[(r, c)] = v;
            }
            out
        }
        (None, None) => unreachable!("representation is either dense or sparse"),
    }
}

/// `X * m` for `m` of shape `dim x l`.
fn x_times(rep: &Representation, m: &DMatrix<f64>) -> DMatrix<f64> {
    let l = m.ncols();
    let mut out = DMatrix::zeros(rep.n_entities(), l);
    match rep.sparse_matrix() {
        Some(x) => {
            for (r, c, v) in x.triplets() {
                for j in 0..l {
                    out[(r, j)] += v * m[(c, j)];
                }
            }
        }
        None => out = to_dense(rep) * m,
    }
    out
}

/// `X^T * m` for `m` of shape `n x l`.
fn xt_times(rep: &Representation, m: &DMatrix<f64>) -> DMatrix<f64> {
    let l = m.ncols();
    let mut out = DMatrix::zeros(rep.dim(), l);
    match rep.sparse_matrix() {
        Some(x) => {
            for (r, c, v) in x.triplets() {
                for j in 0..l {
                    out[(c, j)] += v * m[(r, j)];
                }
            }
        }
        None => out = to_dense(rep).transpose() * m,
    }
    out
}

fn orthonormal_basis(m: DMatrix<f64>) -> DMatrix<f64> {
    m.qr().q()
}

fn sorted_svd(m: DMatrix<f64>, k: usize) -> Result<TruncatedSvd> {
    let svd = m.svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Parameter("SVD did not produce U".into()))?;
    let vt = svd.v_t.ok_or_else(|| Error::Parameter("SVD did not produce V^T".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    order.truncate(k);
    Ok(TruncatedSvd {
        u: u.select_columns(&order),
        singular_values: order.iter().map(|&i| svd.singular_values[i]).collect(),
        vt: vt.select_rows(&order),
    })
}

/// Rank-`k` truncated SVD of the representation matrix (`n_entities x dim`).
pub fn truncated_svd(rep: &Representation, k: usize, opts: &LsaOptions) -> Result<TruncatedSvd> {
    let (n, d) = (rep.n_entities(), rep.dim());
    let max_rank = n.min(d);
    if k == 0 || k > max_rank {
        return Err(Error::Parameter(format!("rank {k} outside 1..={max_rank}")));
    }
    let l = (k + opts.oversample).min(max_rank);
    if n * d <= opts.dense_limit || l == max_rank {
        return sorted_svd(to_dense(rep), k);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let omega = DMatrix::from_fn(d, l, |_, _| rng.random_range(-1.0..1.0));
    let mut q = orthonormal_basis(x_times(rep, &omega));
    for _ in 0..opts.power_iters {
        let z = orthonormal_basis(xt_times(rep, &q));
        q = orthonormal_basis(x_times(rep, &z));
    }
    // B = Q^T X, factored through its transpose (dim x l, tall)
    let bt = xt_times(rep, &q);
    let small = sorted_svd(bt, k)?;
    // B^T = U_b S W_b^T  =>  X ~ (Q W_b) S U_b^T
    Ok(TruncatedSvd {
        u: q * small.vt.transpose(),
        singular_values: small.singular_values,
        vt: small.u.transpose(),
    })
}

/// LSA with default options.
pub fn lsa(rep: &Representation, dim: usize) -> Result<Representation> {
    lsa_with(rep, dim, &LsaOptions::default())
}

/// Projects a tf-idf representation onto its top `dim` singular directions;
/// output rows are `U_dim * S_dim`. `dim` above `min(n_entities, vocabulary)`
/// is clamped with a warning.
pub fn lsa_with(rep: &Representation, dim: usize, opts: &LsaOptions) -> Result<Representation> {
    if rep.kind() != RepresentationKind::Tfidf {
        return Err(Error::Parameter(format!(
            "LSA expects a tf-idf representation, got {:?}",
            rep.kind()
        )));
    }
    if dim < 1 {
        return Err(Error::Parameter("LSA dimension must be at least 1".into()));
    }
    let max_rank = rep.n_entities().min(rep.dim());
    let k = if dim > max_rank {
        warn!("LSA dimension {dim} exceeds the feasible rank {max_rank}; clamping");
        max_rank
    } else {
        dim
    };
    let svd = truncated_svd(rep, k, opts)?;
    let n = rep.n_entities();
    let mut data = Vec::with_capacity(n * k);
    for i in 0..n {
        for j in 0..k {
            data.push(svd.u[(i, j)] * svd.singular_values[j]);
        }
    }
    Representation::dense(RepresentationKind::Lsa, n, k, data)
}
