//! Adapting document embeddings to candidates.
//!
//! Pre-aggregation embeds a joint network of documents and candidate
//! meta-documents; post-aggregation averages the vectors of each
//! candidate's documents.

use std::sync::Arc;

use super::baselines::rep_label;
use super::{check_query, check_rows, RankingModel};
use crate::corpus::{candidate_network, document_network, Dataset, MetaNetwork, SparseMatrix};
use crate::error::Result;
use crate::textrep::{lsa_with, tfidf, LsaOptions, Representation, RowRef};

/// One text per candidate: their documents' texts, space-joined in
/// ascending document order. Empty for candidates without documents.
pub fn meta_documents(dataset: &Dataset) -> Result<Vec<String>> {
    let authored = dataset.a_dc.transpose();
    if authored.n_cols() != dataset.n_documents() {
        return Err(crate::error::Error::Dimension {
            context: "a_dc rows".into(),
            expected: dataset.n_documents(),
            found: authored.n_cols(),
        });
    }
    Ok((0..authored.n_rows())
        .map(|c| {
            authored
                .row(c)
                .0
                .iter()
                .map(|&d| dataset.documents[d].text.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect())
}

/// Builds the meta-network `[[A_d, A_dc], [A_dc^T, A_c]]` with
/// `A_d = A_dc A_dc^T + max(A_dd, A_dd^T)` and `A_c = A_dc^T A_dc`, plus the
/// document texts followed by candidate meta-documents.
pub fn pre_aggregate(dataset: &Dataset) -> Result<MetaNetwork> {
    let a_d = document_network(dataset)?;
    let a_c = candidate_network(dataset)?;
    let adjacency = SparseMatrix::block2x2(&a_d, &dataset.a_dc, &dataset.a_dc.transpose(), &a_c)?;
    let mut texts: Vec<String> = dataset.documents.iter().map(|d| d.text.clone()).collect();
    texts.extend(meta_documents(dataset)?);
    Ok(MetaNetwork {
        adjacency,
        texts,
        n_documents: dataset.n_documents(),
    })
}

/// Embedding provider that ignores the links: LSA over the tf-idf of the
/// meta-network texts.
pub fn lsa_meta_embedding(dim: usize, opts: LsaOptions) -> impl FnOnce(&MetaNetwork) -> Result<Representation> {
    move |meta| {
        let (_, rep) = tfidf(&meta.texts)?;
        lsa_with(&rep, dim, &opts)
    }
}

/// Cosine between the query document's vector and each candidate entity's
/// vector in a joint embedding of the meta-network.
#[derive(Debug, Clone)]
pub struct PreAggModel {
    rep: Representation,
    n_documents: usize,
}

impl PreAggModel {
    pub fn new<F>(dataset: &Dataset, embed: F) -> Result<Self>
    where
        F: FnOnce(&MetaNetwork) -> Result<Representation>,
    {
        let meta = pre_aggregate(dataset)?;
        let rep = embed(&meta)?;
        Self::from_representation(dataset, rep)
    }

    /// Uses vectors already computed for the `n_d + n_c` meta-network
    /// entities (documents first).
    pub fn from_representation(dataset: &Dataset, rep: Representation) -> Result<Self> {
        check_rows(
            "meta-network",
            dataset.n_documents() + dataset.n_candidates(),
            rep.n_entities(),
        )?;
        Ok(PreAggModel {
            rep,
            n_documents: dataset.n_documents(),
        })
    }
}

impl RankingModel for PreAggModel {
    fn name(&self) -> String {
        format!("pre-agg ({})", rep_label(self.rep.kind()))
    }

    fn n_candidates(&self) -> usize {
        self.rep.n_entities() - self.n_documents
    }

    fn score_query(&self, query_doc: usize) -> Result<Vec<f64>> {
        check_query(query_doc, self.n_documents)?;
        Ok(self.rep.cosine_to_row(query_doc)[self.n_documents..].to_vec())
    }
}

/// Candidate vector = unweighted mean of their documents' vectors (zero if
/// none); score = cosine with the query document.
#[derive(Debug, Clone)]
pub struct PostAggModel {
    doc_rep: Arc<Representation>,
    candidate_rep: Representation,
}

impl PostAggModel {
    pub fn new(dataset: &Dataset, doc_rep: Arc<Representation>) -> Result<Self> {
        check_rows("document", dataset.n_documents(), doc_rep.n_entities())?;
        let authored = dataset.a_dc.transpose();
        let n_c = authored.n_rows();
        let dim = doc_rep.dim();
        let candidate_rep = if doc_rep.is_sparse() {
            let mut triplets = Vec::new();
            for c in 0..n_c {
                let docs = authored.row(c).0;
                let w = 1.0 / docs.len() as f64;
                for &d in docs {
                    if let RowRef::Sparse { indices, values } = doc_rep.row(d) {
                        triplets.extend(indices.iter().zip(values).map(|(&t, &v)| (c, t, v * w)));
                    }
                }
            }
            Representation::sparse(doc_rep.kind(), SparseMatrix::from_triplets(n_c, dim, triplets)?)
        } else {
            let mut data = vec![0.0; n_c * dim];
            for c in 0..n_c {
                let docs = authored.row(c).0;
                let mean = &mut data[c * dim..(c + 1) * dim];
                for &d in docs {
                    for (m, v) in mean.iter_mut().zip(doc_rep.row_dense(d)) {
                        *m += v;
                    }
                }
                if !docs.is_empty() {
                    let k = docs.len() as f64;
                    mean.iter_mut().for_each(|m| *m /= k);
                }
            }
            Representation::dense(doc_rep.kind(), n_c, dim, data)?
        };
        Ok(PostAggModel { doc_rep, candidate_rep })
    }

    pub fn candidate_vector(&self, candidate: usize) -> Vec<f64> {
        self.candidate_rep.row_dense(candidate)
    }
}

impl RankingModel for PostAggModel {
    fn name(&self) -> String {
        format!("post-agg ({})", rep_label(self.doc_rep.kind()))
    }

    fn n_candidates(&self) -> usize {
        self.candidate_rep.n_entities()
    }

    fn score_query(&self, query_doc: usize) -> Result<Vec<f64>> {
        check_query(query_doc, self.doc_rep.n_entities())?;
        self.candidate_rep.cosine_all(self.doc_rep.row(query_doc))
    }
}
