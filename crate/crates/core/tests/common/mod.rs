//! Brute-force references and random instance generators shared by the
//! integration tests. Nothing here calls into the library's numerics.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use expertfind::corpus::{Dataset, Document, SparseMatrix};
use expertfind::ingest::{PostType, StackExchangePost};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<f64>>;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

// ---- metrics -------------------------------------------------------------

/// Number of candidates placed ahead of `c`: higher score, or equal score and
/// lower index.
pub fn rank_of(scores: &[f64], c: usize) -> usize {
    (0..scores.len())
        .filter(|&j| scores[j] > scores[c] || (scores[j] == scores[c] && j < c))
        .count()
}

pub fn brute_auc(scores: &[f64], rel: &[bool]) -> Option<f64> {
    let (mut wins, mut ties, mut pairs) = (0.0, 0.0, 0u64);
    for i in (0..scores.len()).filter(|&i| rel[i]) {
        for j in (0..scores.len()).filter(|&j| !rel[j]) {
            pairs += 1;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                ties += 1.0;
            }
        }
    }
    (pairs > 0).then(|| (wins + 0.5 * ties) / pairs as f64)
}

pub fn brute_precision(scores: &[f64], rel: &[bool], k: usize) -> f64 {
    let hits = (0..scores.len()).filter(|&c| rel[c] && rank_of(scores, c) < k).count();
    hits as f64 / k as f64
}

pub fn brute_ap(scores: &[f64], rel: &[bool]) -> Option<f64> {
    let n = scores.len();
    let mut at_rank = vec![0; n];
    for c in 0..n {
        at_rank[rank_of(scores, c)] = c;
    }
    let total = rel.iter().filter(|&&r| r).count();
    if total == 0 {
        return None;
    }
    let mut sum = 0.0;
    for r in 0..n {
        if rel[at_rank[r]] {
            let hits = (0..=r).filter(|&s| rel[at_rank[s]]).count();
            sum += hits as f64 / (r + 1) as f64;
        }
    }
    Some(sum / total as f64)
}

// ---- dense algebra -------------------------------------------------------

pub fn dense_mul(a: &Dense, b: &Dense) -> Dense {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn dense_t(a: &Dense, n_cols: usize) -> Dense {
    (0..n_cols).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

pub fn dense_zip(a: &Dense, b: &Dense, f: impl Fn(f64, f64) -> f64) -> Dense {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(&u, &v)| f(u, v)).collect())
        .collect()
}

pub fn dense_blocks(a: &Dense, b: &Dense, c: &Dense, d: &Dense) -> Dense {
    let mut out: Dense = a.iter().zip(b).map(|(x, y)| [x.clone(), y.clone()].concat()).collect();
    out.extend(c.iter().zip(d).map(|(x, y)| [x.clone(), y.clone()].concat()));
    out
}

/// Solves `m x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut m: Dense, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for k in col..n {
                    m[r][k] -= f * m[col][k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    x
}

/// Stationary restart-walk distribution through a direct linear solve.
///
/// Rows of `adjacency` without edges are replaced by `p0`, then
/// `(I - (1 - alpha) T^T) p = alpha p0`.
pub fn rwr_direct(adjacency: &Dense, p0: &[f64], alpha: f64) -> Vec<f64> {
    let n = p0.len();
    let t: Dense = adjacency
        .iter()
        .map(|row| {
            let s: f64 = row.iter().sum();
            if s == 0.0 {
                p0.to_vec()
            } else {
                row.iter().map(|v| v / s).collect()
            }
        })
        .collect();
    let m: Dense = (0..n)
        .map(|i| (0..n).map(|j| f64::from(i == j) - (1.0 - alpha) * t[j][i]).collect())
        .collect();
    solve(m, p0.iter().map(|v| alpha * v).collect())
}

pub fn dense_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

// ---- random instances ----------------------------------------------------

/// Random nonnegative integer matrix with roughly `density` nonzeros.
pub fn random_counts(rng: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> Dense {
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| if rng.random_bool(density) { rng.random_range(1..=3) as f64 } else { 0.0 })
                .collect()
        })
        .collect()
}

pub fn sparse(d: &Dense, n_cols: usize) -> SparseMatrix {
    SparseMatrix::from_dense(d, n_cols).unwrap()
}

const WORDS: [&str; 12] = [
    "graph", "network", "prior", "bayes", "kernel", "matrix", "query", "rank", "vote", "tree", "text", "model",
];

/// A random dataset with integer-weighted, possibly directed document links.
/// Every document is a query labeled with one of three labels.
pub fn random_dataset(rng: &mut ChaCha8Rng, n_d: usize, n_c: usize) -> (Dataset, Dense, Dense) {
    let a_dc = random_counts(rng, n_d, n_c, 0.3);
    let a_dd: Dense = (0..n_d)
        .map(|i| {
            (0..n_d)
                .map(|j| if i != j && rng.random_bool(0.2) { rng.random_range(1..=2) as f64 } else { 0.0 })
                .collect()
        })
        .collect();
    let documents = (0..n_d)
        .map(|i| {
            let len = rng.random_range(1..6);
            let text: Vec<&str> = (0..len).map(|_| *WORDS.choose(rng).unwrap()).collect();
            Document::new(format!("d{i}"), text.join(" "))
        })
        .collect();
    let doc_labels = (0..n_d).map(|_| BTreeSet::from([rng.random_range(0..3)])).collect();
    let candidate_labels = (0..n_c)
        .map(|_| (0..3).filter(|_| rng.random_bool(0.4)).collect())
        .collect();
    let ds = Dataset {
        documents,
        candidates: (0..n_c).map(|c| format!("c{c}")).collect(),
        a_dc: sparse(&a_dc, n_c),
        a_dd: sparse(&a_dd, n_d),
        label_names: vec!["x".into(), "y".into(), "z".into()],
        doc_labels,
        candidate_labels,
        queries: (0..n_d).collect(),
    };
    (ds, a_dc, a_dd)
}

/// A random posts stream: questions, their answers (some ownerless, some
/// orphaned) and scores spread around the default thresholds.
pub fn random_posts(rng: &mut ChaCha8Rng, n_questions: usize) -> Vec<StackExchangePost> {
    let tags = ["stats", "ml", "bayes", "r", "python"];
    let mut posts = Vec::new();
    let mut next_id = 1u64;
    for _ in 0..n_questions {
        let qid = next_id;
        next_id += 1;
        let n_tags = rng.random_range(0..=3);
        posts.push(StackExchangePost {
            post_id: qid,
            post_type: PostType::Question,
            score: rng.random_range(0..20),
            parent_id: None,
            owner_id: Some(rng.random_range(0..15)),
            tags: (0..n_tags).map(|_| tags.choose(rng).unwrap().to_string()).collect(),
            title: Some(format!("question {qid}")),
            body: format!("<p>{} {}</p>", WORDS.choose(rng).unwrap(), WORDS.choose(rng).unwrap()),
        });
        for _ in 0..rng.random_range(0..4) {
            let orphan = rng.random_bool(0.05);
            posts.push(StackExchangePost {
                post_id: next_id,
                post_type: PostType::Answer,
                score: rng.random_range(0..20),
                parent_id: Some(if orphan { 100_000 + next_id } else { qid }),
                owner_id: rng.random_bool(0.9).then(|| rng.random_range(0..15)),
                tags: BTreeSet::new(),
                title: None,
                body: format!("<p>{}</p>", WORDS.choose(rng).unwrap()),
            });
            next_id += 1;
        }
    }
    posts.shuffle(rng);
    posts
}
