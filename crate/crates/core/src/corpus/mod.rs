//! Expert-finding datasets: documents, candidates, the authorship and
//! document-document networks, and ground-truth expertise labels.

mod sparse;
mod toy;

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use sparse::SparseMatrix;
pub use toy::toy_dataset;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
        }
    }
}

/// A complete expert-finding instance.
///
/// `doc_labels` and `candidate_labels` are indexed by document and candidate
/// position; an empty set means the entity carries no ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub documents: Vec<Document>,
    pub candidates: Vec<String>,
    /// Authorship, `n_d x n_c`.
    pub a_dc: SparseMatrix,
    /// Document links (citations, answers), `n_d x n_d`, possibly directed.
    pub a_dd: SparseMatrix,
    pub label_names: Vec<String>,
    pub doc_labels: Vec<BTreeSet<usize>>,
    pub candidate_labels: Vec<BTreeSet<usize>>,
    /// Document indices used as queries.
    pub queries: Vec<usize>,
}

impl Dataset {
    pub fn n_documents(&self) -> usize {
        self.documents.len()
    }

    pub fn n_candidates(&self) -> usize {
        self.candidates.len()
    }

    /// Candidates with at least one expertise label.
    pub fn n_experts(&self) -> usize {
        self.candidate_labels.iter().filter(|l| !l.is_empty()).count()
    }

    /// Candidates with a nonzero authorship entry on document `doc`.
    pub fn authors_of(&self, doc: usize) -> &[usize] {
        self.a_dc.row(doc).0
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    QueryOutOfRange {
        position: usize,
        doc: usize,
    },
    DuplicateQuery {
        doc: usize,
    },
    UnlabeledQuery {
        doc: usize,
    },
    LabelOutOfRange {
        entity: &'static str,
        index: usize,
        label: usize,
    },
    DuplicateId {
        entity: &'static str,
        id: String,
    },
    TooManyQueries {
        queries: usize,
        documents: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DimensionMismatch { what, expected, found } => {
                write!(f, "dimension mismatch: {what} is {found}, expected {expected}")
            }
            Violation::QueryOutOfRange { position, doc } => {
                write!(f, "query #{position} points at document {doc}, which does not exist")
            }
            Violation::DuplicateQuery { doc } => write!(f, "document {doc} is listed as a query twice"),
            Violation::UnlabeledQuery { doc } => write!(f, "query document {doc} has no labels"),
            Violation::LabelOutOfRange { entity, index, label } => {
                write!(f, "{entity} {index} carries label {label}, which has no name")
            }
            Violation::DuplicateId { entity, id } => write!(f, "{entity} id {id:?} is not unique"),
            Violation::TooManyQueries { queries, documents } => {
                write!(f, "{queries} queries for {documents} documents")
            }
        }
    }
}

/// Outcome of [`validate`]. Empty when the dataset is consistent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// Converts a non-empty report into an error listing the first violations.
    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            return Ok(());
        }
        let shown: Vec<String> = self.violations.iter().take(5).map(|v| v.to_string()).collect();
        Err(Error::Parameter(format!(
            "invalid dataset ({} violations): {}",
            self.violations.len(),
            shown.join("; ")
        )))
    }
}

/// Lists every broken dataset invariant. Never fails.
pub fn validate(ds: &Dataset) -> ValidationReport {
    let mut violations = Vec::new();
    let n_d = ds.documents.len();
    let n_c = ds.candidates.len();
    let mut dim = |what, expected, found| {
        if expected != found {
            violations.push(Violation::DimensionMismatch { what, expected, found });
        }
    };
    dim("a_dc rows", n_d, ds.a_dc.n_rows());
    dim("a_dc columns", n_c, ds.a_dc.n_cols());
    dim("a_dd rows", n_d, ds.a_dd.n_rows());
    dim("a_dd columns", n_d, ds.a_dd.n_cols());
    dim("doc_labels length", n_d, ds.doc_labels.len());
    dim("candidate_labels length", n_c, ds.candidate_labels.len());

    let n_labels = ds.label_names.len();
    for (entity, sets) in [("document", &ds.doc_labels), ("candidate", &ds.candidate_labels)] {
        for (index, set) in sets.iter().enumerate() {
            for &label in set.iter().filter(|&&l| l >= n_labels) {
                violations.push(Violation::LabelOutOfRange { entity, index, label });
            }
        }
    }

    if ds.queries.len() > n_d {
        violations.push(Violation::TooManyQueries {
            queries: ds.queries.len(),
            documents: n_d,
        });
    }
    let mut seen = HashSet::new();
    for (position, &doc) in ds.queries.iter().enumerate() {
        if doc >= n_d {
            violations.push(Violation::QueryOutOfRange { position, doc });
            continue;
        }
        if !seen.insert(doc) {
            violations.push(Violation::DuplicateQuery { doc });
        }
        if ds.doc_labels.get(doc).is_none_or(|l| l.is_empty()) {
            violations.push(Violation::UnlabeledQuery { doc });
        }
    }

    for (entity, ids) in [
        ("document", ds.documents.iter().map(|d| d.id.as_str()).collect::<Vec<_>>()),
        ("candidate", ds.candidates.iter().map(String::as_str).collect()),
        ("label", ds.label_names.iter().map(String::as_str).collect()),
    ] {
        let mut seen = HashSet::new();
        for id in ids {
            if !seen.insert(id) {
                violations.push(Violation::DuplicateId {
                    entity,
                    id: id.to_string(),
                });
            }
        }
    }

    ValidationReport { violations }
}

fn check_shapes(ds: &Dataset) -> Result<()> {
    let n_d = ds.documents.len();
    for (context, expected, found) in [
        ("a_dc rows", n_d, ds.a_dc.n_rows()),
        ("a_dc columns", ds.candidates.len(), ds.a_dc.n_cols()),
        ("a_dd rows", n_d, ds.a_dd.n_rows()),
        ("a_dd columns", n_d, ds.a_dd.n_cols()),
    ] {
        if expected != found {
            return Err(Error::Dimension {
                context: context.into(),
                expected,
                found,
            });
        }
    }
    Ok(())
}

/// `max(A_dd, A_dd^T)`: document links treated as undirected.
pub fn symmetric_document_links(ds: &Dataset) -> Result<SparseMatrix> {
    check_shapes(ds)?;
    ds.a_dd.symmetrize_max()
}

/// `A_d = A_dc A_dc^T + max(A_dd, A_dd^T)`.
///
/// The diagonal of the co-authorship term (number of authors of each
/// document) is kept.
pub fn document_network(ds: &Dataset) -> Result<SparseMatrix> {
    let coauthored = ds.a_dc.matmul(&ds.a_dc.transpose())?;
    coauthored.add(&symmetric_document_links(ds)?)
}

/// Candidate co-authorship network `A_c = A_dc^T A_dc`.
pub fn candidate_network(ds: &Dataset) -> Result<SparseMatrix> {
    check_shapes(ds)?;
    let t = ds.a_dc.transpose();
    t.matmul(&ds.a_dc)
}

/// Joint document + candidate network with documents occupying the first
/// `n_d` rows and columns, candidates the remaining `n_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaNetwork {
    pub adjacency: SparseMatrix,
    /// Document texts followed by one meta-document per candidate.
    pub texts: Vec<String>,
    pub n_documents: usize,
}

impl MetaNetwork {
    pub fn n_entities(&self) -> usize {
        self.texts.len()
    }

    pub fn n_candidates(&self) -> usize {
        self.texts.len() - self.n_documents
    }
}
