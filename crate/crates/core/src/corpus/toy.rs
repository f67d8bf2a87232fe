use std::collections::BTreeSet;

use super::{Dataset, Document, SparseMatrix};

const STAR: usize = 0;
const CIRCLE: usize = 1;

/// The six-document, five-candidate example network with `star` and
/// `circle` expertise labels.
///
/// Each document text is a private token (`d1` .. `d6`) followed by one
/// token per label it carries, so text similarity lines up with the ground
/// truth.
pub fn toy_dataset() -> Dataset {
    let doc_labels: Vec<BTreeSet<usize>> = vec![
        [STAR].into(),
        BTreeSet::new(),
        [STAR].into(),
        BTreeSet::new(),
        [STAR, CIRCLE].into(),
        [CIRCLE].into(),
    ];
    let label_names = vec!["star".to_string(), "circle".to_string()];
    let documents = doc_labels
        .iter()
        .enumerate()
        .map(|(i, labels)| {
            let mut text = format!("d{}", i + 1);
            for &l in labels {
                text.push(' ');
                text.push_str(&label_names[l]);
            }
            Document::new(format!("D{}", i + 1), text)
        })
        .collect();

    // (document, candidate), zero-based
    let authorship = [
        (0, 0),
        (1, 0),
        (2, 0),
        (1, 1),
        (2, 2),
        (3, 2),
        (4, 2),
        (4, 3),
        (5, 3),
        (5, 4),
    ];
    let a_dc = SparseMatrix::from_triplets(6, 5, authorship.iter().map(|&(d, c)| (d, c, 1.0)))
        .expect("static fixture");

    let links = [(0, 1), (0, 3), (1, 2), (2, 4), (3, 5), (4, 5)];
    let a_dd = SparseMatrix::from_triplets(
        6,
        6,
        links.iter().flat_map(|&(a, b)| [(a, b, 1.0), (b, a, 1.0)]),
    )
    .expect("static fixture");

    Dataset {
        documents,
        candidates: (1..=5).map(|i| format!("C{i}")).collect(),
        a_dc,
        a_dd,
        label_names,
        doc_labels,
        candidate_labels: vec![
            BTreeSet::new(),
            BTreeSet::new(),
            [STAR].into(),
            [STAR, CIRCLE].into(),
            [CIRCLE].into(),
        ],
        queries: vec![0, 2, 4, 5],
    }
}
