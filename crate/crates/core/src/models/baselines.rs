use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_query, check_rows, meta_documents, RankingModel};
use crate::corpus::{Dataset, SparseMatrix};
use crate::error::Result;
use crate::eval::relevance;
use crate::textrep::{tfidf, Representation, RepresentationKind};

pub(crate) fn rep_label(kind: RepresentationKind) -> &'static str {
    match kind {
        RepresentationKind::Tfidf => "tf-idf",
        RepresentationKind::Lsa => "lsa",
        RepresentationKind::External => "external",
    }
}

/// Uniform `[0, 1)` scores. Each query draws from its own ChaCha stream, so
/// scores depend only on `(seed, query)` and not on evaluation order.
#[derive(Debug, Clone)]
pub struct RandomModel {
    seed: u64,
    n_documents: usize,
    n_candidates: usize,
}

impl RandomModel {
    pub fn new(dataset: &Dataset, seed: u64) -> Self {
        RandomModel {
            seed,
            n_documents: dataset.n_documents(),
            n_candidates: dataset.n_candidates(),
        }
    }
}

impl RankingModel for RandomModel {
    fn name(&self) -> String {
        "random".into()
    }

    fn n_candidates(&self) -> usize {
        self.n_candidates
    }

    fn score_query(&self, query_doc: usize) -> Result<Vec<f64>> {
        check_query(query_doc, self.n_documents)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(query_doc as u64);
        Ok((0..self.n_candidates).map(|_| rng.random::<f64>()).collect())
    }
}

/// Candidate meta-documents compared to the query with tf-idf cosine.
/// One vocabulary is fitted over documents and meta-documents together.
#[derive(Debug, Clone)]
pub struct PanopticModel {
    rep: Representation,
    n_documents: usize,
}

impl PanopticModel {
    pub fn new(dataset: &Dataset) -> Result<Self> {
        let mut texts: Vec<String> = dataset.documents.iter().map(|d| d.text.clone()).collect();
        texts.extend(meta_documents(dataset)?);
        let (_, rep) = tfidf(&texts)?;
        Ok(PanopticModel {
            rep,
            n_documents: dataset.n_documents(),
        })
    }
}

impl RankingModel for PanopticModel {
    fn name(&self) -> String {
        "panoptic (tf-idf)".into()
    }

    fn n_candidates(&self) -> usize {
        self.rep.n_entities() - self.n_documents
    }

    fn score_query(&self, query_doc: usize) -> Result<Vec<f64>> {
        check_query(query_doc, self.n_documents)?;
        let all = self.rep.cosine_to_row(query_doc);
        Ok(all[self.n_documents..].to_vec())
    }
}

/// Ranks documents by cosine to the query, then gives each candidate the
/// sum of reciprocal ranks of the documents they authored.
#[derive(Debug, Clone)]
pub struct VotingModel {
    doc_rep: Arc<Representation>,
    /// `A_dc^T`: documents of each candidate in ascending order.
    authored: SparseMatrix,
}

impl VotingModel {
    pub fn new(dataset: &Dataset, doc_rep: Arc<Representation>) -> Result<Self> {
        check_rows("document", dataset.n_documents(), doc_rep.n_entities())?;
        Ok(VotingModel {
            doc_rep,
            authored: dataset.a_dc.transpose(),
        })
    }

    /// 1-based rank of every document; ties go to the lower index.
    pub fn document_ranks(similarities: &[f64]) -> Vec<usize> {
        let mut order: Vec<usize> = (0..similarities.len()).collect();
        order.sort_by(|&a, &b| similarities[b].total_cmp(&similarities[a]).then(a.cmp(&b)));
        let mut ranks = vec![0; similarities.len()];
        for (pos, d) in order.into_iter().enumerate() {
            ranks[d] = pos + 1;
        }
        ranks
    }

    /// Reciprocal-rank fusion of document similarities into candidate scores.
    pub fn aggregate(&self, similarities: &[f64]) -> Vec<f64> {
        let ranks = Self::document_ranks(similarities);
        (0..self.authored.n_rows())
            .map(|c| self.authored.row(c).0.iter().map(|&d| 1.0 / ranks[d] as f64).sum())
            .collect()
    }
}

impl RankingModel for VotingModel {
    fn name(&self) -> String {
        format!("voting ({})", rep_label(self.doc_rep.kind()))
    }

    fn n_candidates(&self) -> usize {
        self.authored.n_rows()
    }

    fn score_query(&self, query_doc: usize) -> Result<Vec<f64>> {
        check_query(query_doc, self.doc_rep.n_entities())?;
        Ok(self.aggregate(&self.doc_rep.cosine_to_row(query_doc)))
    }
}

/// Scores 1 for candidates sharing a label with the query and 0 otherwise.
/// Reads the ground truth, so it only serves as an upper reference.
#[derive(Debug, Clone)]
pub struct OracleModel {
    dataset: Arc<Dataset>,
}

impl OracleModel {
    pub fn new(dataset: Arc<Dataset>) -> Self {
        OracleModel { dataset }
    }
}

impl RankingModel for OracleModel {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn n_candidates(&self) -> usize {
        self.dataset.n_candidates()
    }

    fn score_query(&self, query_doc: usize) -> Result<Vec<f64>> {
        check_query(query_doc, self.dataset.n_documents())?;
        let rel = relevance(&self.dataset, query_doc)?;
        Ok(rel.into_iter().map(|r| if r { 1.0 } else { 0.0 }).collect())
    }
}
