//! Random walk with restart over the joint document/candidate graph.
//!
//! The graph is `A = [[max(A_dd, A_dd^T), A_dc], [A_dc^T, 0]]` with
//! documents first. `T` is `A` row-normalized; a node without edges sends
//! its mass back to the restart distribution. Starting from the restart
//! distribution `p0`, the walk iterates
//!
//! ```text
//! p <- (1 - alpha) T^T p + alpha p0
//! ```
//!
//! until the L1 change drops below `tol`. The map is a contraction with
//! modulus `1 - alpha`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::baselines::rep_label;
use super::{check_query, check_rows, RankingModel};
use crate::corpus::{symmetric_document_links, Dataset, SparseMatrix};
use crate::error::{Error, Result};
use crate::textrep::Representation;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationParams {
    /// Restart probability in `(0, 1]`.
    pub restart_prob: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PropagationParams {
    fn default() -> Self {
        PropagationParams {
            restart_prob: 0.5,
            tol: 1e-8,
            max_iter: 200,
        }
    }
}

impl PropagationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.restart_prob > 0.0 && self.restart_prob <= 1.0) {
            return Err(Error::Parameter(format!(
                "restart probability must lie in (0, 1], got {}",
                self.restart_prob
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Parameter(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    /// Stationary mass on candidate nodes.
    pub scores: Vec<f64>,
    /// Full distribution over documents then candidates.
    pub distribution: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// The query had no positive similarity to any document and the walk
    /// restarted uniformly over documents instead.
    pub uniform_fallback: bool,
}

/// Row-stochastic transition structure of a graph, dangling rows excluded.
#[derive(Debug, Clone)]
pub struct Transition {
    normalized: SparseMatrix,
    dangling: Vec<usize>,
}

impl Transition {
    pub fn new(adjacency: &SparseMatrix) -> Result<Self> {
        if adjacency.n_rows() != adjacency.n_cols() {
            return Err(Error::Dimension {
                context: "transition matrix must be square".into(),
                expected: adjacency.n_rows(),
                found: adjacency.n_cols(),
            });
        }
        let sums = adjacency.row_sums();
        let mut values = Vec::with_capacity(adjacency.nnz());
        for (r, &s) in sums.iter().enumerate() {
            values.extend(adjacency.row(r).1.iter().map(|v| v / s));
        }
        let normalized = SparseMatrix::from_csr(
            adjacency.n_rows(),
            adjacency.n_cols(),
            adjacency.row_offsets().to_vec(),
            adjacency.col_indices().to_vec(),
            values,
        )?;
        let dangling = sums
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 0.0)
            .map(|(i, _)| i)
            .collect();
        Ok(Transition { normalized, dangling })
    }

    pub fn n_nodes(&self) -> usize {
        self.normalized.n_rows()
    }

    /// Iterates the restart walk from `p0` (a distribution over all nodes).
    pub fn walk(&self, p0: &[f64], params: &PropagationParams) -> (Vec<f64>, usize, bool) {
        let n = self.n_nodes();
        let alpha = params.restart_prob;
        let mut p = p0.to_vec();
        let mut next = vec![0.0; n];
        for iter in 1..=params.max_iter {
            let dangling_mass: f64 = self.dangling.iter().map(|&i| p[i]).sum();
            for (x, &r) in next.iter_mut().zip(p0) {
                *x = (alpha + (1.0 - alpha) * dangling_mass) * r;
            }
            for (i, &mass) in p.iter().enumerate() {
                if mass == 0.0 {
                    continue;
                }
                let share = (1.0 - alpha) * mass;
                let (cols, weights) = self.normalized.row(i);
                for (&j, &w) in cols.iter().zip(weights) {
                    next[j] += share * w;
                }
            }
            let diff: f64 = p.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
            std::mem::swap(&mut p, &mut next);
            if diff < params.tol {
                return (p, iter, true);
            }
        }
        (p, params.max_iter, false)
    }
}

/// Propagates query-document similarities to candidates through authorship
/// and document links.
#[derive(Debug, Clone)]
pub struct PropagationModel {
    doc_rep: Arc<Representation>,
    transition: Transition,
    n_documents: usize,
    params: PropagationParams,
}

impl PropagationModel {
    pub fn new(dataset: &Dataset, doc_rep: Arc<Representation>, params: PropagationParams) -> Result<Self> {
        params.validate()?;
        check_rows("document", dataset.n_documents(), doc_rep.n_entities())?;
        let links = symmetric_document_links(dataset)?;
        let n_c = dataset.n_candidates();
        let adjacency = SparseMatrix::block2x2(
            &links,
            &dataset.a_dc,
            &dataset.a_dc.transpose(),
            &SparseMatrix::zeros(n_c, n_c),
        )?;
        Ok(PropagationModel {
            doc_rep,
            transition: Transition::new(&adjacency)?,
            n_documents: dataset.n_documents(),
            params,
        })
    }

    pub fn params(&self) -> &PropagationParams {
        &self.params
    }

    /// Restart distribution: clipped similarities normalized to sum 1 over
    /// documents, or uniform over documents when every similarity is <= 0.
    pub fn restart_distribution(&self, similarities: &[f64]) -> (Vec<f64>, bool) {
        let mut p0 = vec![0.0; self.transition.n_nodes()];
        let total: f64 = similarities.iter().map(|s| s.max(0.0)).sum();
        if total > 0.0 {
            for (x, s) in p0.iter_mut().zip(similarities) {
                *x = s.max(0.0) / total;
            }
            (p0, false)
        } else {
            let u = 1.0 / self.n_documents as f64;
            p0[..self.n_documents].fill(u);
            (p0, true)
        }
    }

    pub fn score_query_detailed(&self, query_doc: usize) -> Result<PropagationResult> {
        check_query(query_doc, self.n_documents)?;
        let sims = self.doc_rep.cosine_to_row(query_doc);
        let (p0, uniform_fallback) = self.restart_distribution(&sims);
        let (p, iterations, converged) = self.transition.walk(&p0, &self.params);
        if !converged {
            log::warn!("propagation for query {query_doc} stopped after {iterations} iterations without converging");
        }
        Ok(PropagationResult {
            scores: p[self.n_documents..].to_vec(),
            distribution: p,
            iterations,
            converged,
            uniform_fallback,
        })
    }
}

impl RankingModel for PropagationModel {
    fn name(&self) -> String {
        format!("propagation ({})", rep_label(self.doc_rep.kind()))
    }

    fn n_candidates(&self) -> usize {
        self.transition.n_nodes() - self.n_documents
    }

    fn score_query(&self, query_doc: usize) -> Result<Vec<f64>> {
        Ok(self.score_query_detailed(query_doc)?.scores)
    }
}
