use std::collections::{BTreeMap, HashMap};

use super::{tokenize, Representation, RepresentationKind};
use crate::corpus::SparseMatrix;
use crate::error::{Error, Result};

/// Terms seen in a corpus, sorted lexicographically, with their document
/// frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    pub terms: Vec<String>,
    pub doc_frequency: Vec<usize>,
    pub n_documents: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok()
    }

    /// Smoothed inverse document frequency `ln((1 + n) / (1 + df)) + 1`.
    pub fn idf(&self, index: usize) -> f64 {
        let n = self.n_documents as f64;
        ((1.0 + n) / (1.0 + self.doc_frequency[index] as f64)).ln() + 1.0
    }
}

/// Fits tf-idf on `corpus`: raw term counts times smoothed idf, each row
/// L2-normalized. Token-free documents get zero rows.
pub fn tfidf<S: AsRef<str>>(corpus: &[S]) -> Result<(Vocabulary, Representation)> {
    let mut term_ids: HashMap<String, usize> = HashMap::new();
    let mut counts: Vec<Vec<(usize, f64)>> = Vec::with_capacity(corpus.len());
    for text in corpus {
        let mut row: BTreeMap<usize, f64> = BTreeMap::new();
        for token in tokenize(text.as_ref()) {
            let next = term_ids.len();
            let id = *term_ids.entry(token).or_insert(next);
            *row.entry(id).or_default() += 1.0;
        }
        counts.push(row.into_iter().collect());
    }
    if term_ids.is_empty() {
        return Err(Error::EmptyVocabulary);
    }

    // renumber terms in sorted order
    let mut terms: Vec<(String, usize)> = term_ids.into_iter().collect();
    terms.sort_unstable();
    let mut remap = vec![0usize; terms.len()];
    for (new, (_, old)) in terms.iter().enumerate() {
        remap[*old] = new;
    }
    let mut doc_frequency = vec![0usize; terms.len()];
    for row in &counts {
        for &(t, _) in row {
            doc_frequency[remap[t]] += 1;
        }
    }
    let vocab = Vocabulary {
        terms: terms.into_iter().map(|(t, _)| t).collect(),
        doc_frequency,
        n_documents: corpus.len(),
    };
    let idf: Vec<f64> = (0..vocab.len()).map(|i| vocab.idf(i)).collect();

    let mut triplets = Vec::new();
    for (d, row) in counts.iter().enumerate() {
        // sorted by term so the norm is summed in a fixed order
        let mut weighted: Vec<(usize, f64)> = row.iter().map(|&(t, tf)| (remap[t], tf * idf[remap[t]])).collect();
        weighted.sort_unstable_by_key(|&(t, _)| t);
        let norm = weighted.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        triplets.extend(weighted.into_iter().map(|(t, w)| (d, t, w / norm)));
    }
    let matrix = SparseMatrix::from_triplets(corpus.len(), vocab.len(), triplets)?;
    Ok((vocab, Representation::sparse(RepresentationKind::Tfidf, matrix)))
}
