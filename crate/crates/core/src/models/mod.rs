//! Ranking models: every model maps a query document to one score per
//! candidate, higher meaning more likely to be an expert for that query.

mod aggregation;
mod baselines;
mod propagation;

use crate::error::{Error, Result};

pub use aggregation::{lsa_meta_embedding, meta_documents, pre_aggregate, PostAggModel, PreAggModel};
pub use baselines::{OracleModel, PanopticModel, RandomModel, VotingModel};
pub use propagation::{PropagationModel, PropagationParams, PropagationResult, Transition};

pub trait RankingModel: Send + Sync {
    /// Short label used in reports, e.g. `voting (tfidf)`.
    fn name(&self) -> String;

    fn n_candidates(&self) -> usize;

    /// Scores for every candidate given the document at index `query_doc`.
    fn score_query(&self, query_doc: usize) -> Result<Vec<f64>>;
}

impl<M: RankingModel + ?Sized> RankingModel for Box<M> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn n_candidates(&self) -> usize {
        (**self).n_candidates()
    }

    fn score_query(&self, query_doc: usize) -> Result<Vec<f64>> {
        (**self).score_query(query_doc)
    }
}

fn check_query(query_doc: usize, n_documents: usize) -> Result<()> {
    if query_doc >= n_documents {
        return Err(Error::Query {
            query: query_doc,
            message: format!("document index out of range (n_d = {n_documents})"),
        });
    }
    Ok(())
}

fn check_rows(what: &str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::Dimension {
            context: format!("{what} representation rows"),
            expected,
            found,
        });
    }
    Ok(())
}
