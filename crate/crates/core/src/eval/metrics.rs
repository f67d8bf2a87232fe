//! Ranking metrics over one query: per-candidate scores against binary
//! relevance.
//!
//! Rankings order candidates by descending score and break ties by
//! ascending candidate index; AUC instead counts tied pairs as one half.

/// Candidate indices from best to worst.
pub fn ranking(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// Area under the ROC curve in its Mann-Whitney form:
/// `(#{s_rel > s_non} + 0.5 #{s_rel = s_non}) / (P N)`.
///
/// `None` when every candidate is relevant or none is.
pub fn auc(scores: &[f64], rel: &[bool]) -> Option<f64> {
    assert_eq!(scores.len(), rel.len(), "scores and relevance differ in length");
    let positives = rel.iter().filter(|&&r| r).count() as u64;
    let negatives = rel.len() as u64 - positives;
    if positives == 0 || negatives == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // twice the Mann-Whitney statistic, kept integral
    let mut doubled: u64 = 0;
    let mut negatives_below: u64 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let (mut pos, mut neg) = (0u64, 0u64);
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if rel[order[j]] {
                pos += 1;
            } else {
                neg += 1;
            }
            j += 1;
        }
        doubled += 2 * pos * negatives_below + pos * neg;
        negatives_below += neg;
        i = j;
    }
    Some(doubled as f64 / (2 * positives * negatives) as f64)
}

/// Relevant candidates among the top `k`, divided by `k` even when fewer
/// than `k` candidates exist.
pub fn precision_at_k(scores: &[f64], rel: &[bool], k: usize) -> f64 {
    assert!(k >= 1, "precision at k needs k >= 1");
    assert_eq!(scores.len(), rel.len(), "scores and relevance differ in length");
    let hits = ranking(scores).into_iter().take(k).filter(|&c| rel[c]).count();
    hits as f64 / k as f64
}

/// Mean of the precision at each relevant candidate's rank. `None` without
/// relevant candidates.
pub fn average_precision(scores: &[f64], rel: &[bool]) -> Option<f64> {
    assert_eq!(scores.len(), rel.len(), "scores and relevance differ in length");
    let total = rel.iter().filter(|&&r| r).count();
    if total == 0 {
        return None;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (pos, c) in ranking(scores).into_iter().enumerate() {
        if rel[c] {
            hits += 1;
            sum += hits as f64 / (pos + 1) as f64;
        }
    }
    Some(sum / total as f64)
}

/// ROC polyline `(fpr, tpr)` from `(0, 0)` to `(1, 1)`, one vertex per
/// distinct score threshold. Ties produce diagonal segments.
pub fn roc_curve(scores: &[f64], rel: &[bool]) -> Option<Vec<(f64, f64)>> {
    let positives = rel.iter().filter(|&&r| r).count();
    let negatives = rel.len() - positives;
    if positives == 0 || negatives == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if rel[order[j]] {
                tp += 1;
            } else {
                fp += 1;
            }
            j += 1;
        }
        points.push((fp as f64 / negatives as f64, tp as f64 / positives as f64));
        i = j;
    }
    Some(points)
}

/// True positive rate of a ROC polyline at false positive rate `x`. At a
/// vertical step the upper value is taken.
pub fn tpr_at(curve: &[(f64, f64)], x: f64) -> f64 {
    let last = curve.iter().rposition(|&(f, _)| f <= x).unwrap_or(0);
    let (f0, t0) = curve[last];
    if f0 == x || last + 1 == curve.len() {
        return t0;
    }
    let (f1, t1) = curve[last + 1];
    t0 + (t1 - t0) * (x - f0) / (f1 - f0)
}
