//! Document-query evaluation: each query document is expanded to the set of
//! candidates sharing one of its labels, and a model's candidate ranking is
//! scored against that set.

mod metrics;
mod report;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::models::RankingModel;

pub use metrics::{auc, average_precision, precision_at_k, ranking, roc_curve, tpr_at};
pub use report::{format_table_row, roc_export, write_json, write_roc_csv, write_tsv};

/// Number of points on the false positive rate grid of averaged ROC curves.
pub const ROC_GRID: usize = 101;

/// Candidates sharing at least one label with the query document.
pub fn relevance(dataset: &Dataset, query_doc: usize) -> Result<Vec<bool>> {
    let labels = dataset.doc_labels.get(query_doc).ok_or_else(|| Error::Query {
        query: query_doc,
        message: format!("document index out of range (n_d = {})", dataset.n_documents()),
    })?;
    if labels.is_empty() {
        return Err(Error::Query {
            query: query_doc,
            message: "query document carries no label".into(),
        });
    }
    Ok(dataset
        .candidate_labels
        .iter()
        .map(|c| !c.is_disjoint(labels))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalOptions {
    /// Cutoff of the precision metric.
    pub k: usize,
    /// Drop the query document's own authors from its ranking.
    pub exclude_query_authors: bool,
    /// Compute the vertically averaged ROC curve.
    pub roc: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            k: 10,
            exclude_query_authors: false,
            roc: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub query: usize,
    pub auc: f64,
    pub p_at_k: f64,
    pub ap: f64,
    pub n_relevant: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    NoRelevant,
    NoNonRelevant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedQuery {
    pub query: usize,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl Summary {
    /// Zero mean and spread for an empty sample.
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let values: Vec<f64> = values.into_iter().collect();
        if values.is_empty() {
            return Summary { mean: 0.0, std: 0.0 };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Summary { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub k: usize,
    pub per_query: Vec<QueryResult>,
    pub skipped: Vec<SkippedQuery>,
    pub auc: Summary,
    pub p_at_k: Summary,
    pub ap: Summary,
    /// `ROC_GRID` points `(fpr, tpr)` averaged over evaluated queries.
    pub roc: Option<Vec<(f64, f64)>>,
}

impl EvalReport {
    pub fn n_queries(&self) -> usize {
        self.per_query.len()
    }

    pub fn n_skipped(&self) -> usize {
        self.skipped.len()
    }
}

enum Outcome {
    Scored(QueryResult, Option<Vec<f64>>),
    Skipped(SkippedQuery),
}

fn evaluate_query<M: RankingModel + ?Sized>(
    model: &M,
    dataset: &Dataset,
    query: usize,
    opts: &EvalOptions,
) -> Result<Outcome> {
    let mut rel = relevance(dataset, query)?;
    let mut scores = model.score_query(query)?;
    if scores.len() != rel.len() {
        return Err(Error::Query {
            query,
            message: format!("model returned {} scores for {} candidates", scores.len(), rel.len()),
        });
    }
    if let Some(c) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::Query {
            query,
            message: format!("model returned a non-finite score for candidate {c}"),
        });
    }
    if opts.exclude_query_authors {
        let authors = dataset.authors_of(query);
        let keep: Vec<usize> = (0..rel.len()).filter(|c| authors.binary_search(c).is_err()).collect();
        scores = keep.iter().map(|&c| scores[c]).collect();
        rel = keep.iter().map(|&c| rel[c]).collect();
    }
    let n_relevant = rel.iter().filter(|&&r| r).count();
    let reason = if n_relevant == 0 {
        Some(SkipReason::NoRelevant)
    } else if n_relevant == rel.len() {
        Some(SkipReason::NoNonRelevant)
    } else {
        None
    };
    if let Some(reason) = reason {
        return Ok(Outcome::Skipped(SkippedQuery { query, reason }));
    }
    let roc = opts.roc.then(|| {
        let curve = roc_curve(&scores, &rel).expect("both classes present");
        (0..ROC_GRID).map(|j| tpr_at(&curve, grid_point(j))).collect()
    });
    let result = QueryResult {
        query,
        auc: auc(&scores, &rel).expect("both classes present"),
        p_at_k: precision_at_k(&scores, &rel, opts.k),
        ap: average_precision(&scores, &rel).expect("at least one relevant"),
        n_relevant,
    };
    Ok(Outcome::Scored(result, roc))
}

fn grid_point(j: usize) -> f64 {
    j as f64 / (ROC_GRID - 1) as f64
}

/// Scores every query of the dataset. Queries run in parallel; the report
/// lists them in dataset order and is independent of the thread count.
pub fn evaluate<M: RankingModel + ?Sized>(model: &M, dataset: &Dataset, opts: &EvalOptions) -> Result<EvalReport> {
    if opts.k == 0 {
        return Err(Error::Parameter("precision cutoff k must be at least 1".into()));
    }
    if model.n_candidates() != dataset.n_candidates() {
        return Err(Error::Dimension {
            context: format!("candidates scored by {}", model.name()),
            expected: dataset.n_candidates(),
            found: model.n_candidates(),
        });
    }
    let outcomes: Vec<Outcome> = dataset
        .queries
        .par_iter()
        .map(|&q| evaluate_query(model, dataset, q, opts))
        .collect::<Result<_>>()?;

    let mut per_query = Vec::new();
    let mut skipped = Vec::new();
    let mut roc_sum = opts.roc.then(|| vec![0.0; ROC_GRID]);
    for outcome in outcomes {
        match outcome {
            Outcome::Scored(r, curve) => {
                if let (Some(sum), Some(curve)) = (roc_sum.as_mut(), curve) {
                    sum.iter_mut().zip(curve).for_each(|(s, t)| *s += t);
                }
                per_query.push(r);
            }
            Outcome::Skipped(s) => skipped.push(s),
        }
    }
    if !skipped.is_empty() {
        log::info!("{}: skipped {} of {} queries", model.name(), skipped.len(), dataset.queries.len());
    }
    let n = per_query.len().max(1) as f64;
    let roc = roc_sum.map(|sum| {
        sum.into_iter()
            .enumerate()
            .map(|(j, s)| (grid_point(j), if per_query.is_empty() { 0.0 } else { s / n }))
            .collect()
    });
    Ok(EvalReport {
        model: model.name(),
        k: opts.k,
        auc: Summary::of(per_query.iter().map(|r| r.auc)),
        p_at_k: Summary::of(per_query.iter().map(|r| r.p_at_k)),
        ap: Summary::of(per_query.iter().map(|r| r.ap)),
        per_query,
        skipped,
        roc,
    })
}
