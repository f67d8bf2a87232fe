//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.
//!
//! Criteria on the public DBLP and Stats extracts read them from
//! `$EXPERT_FINDING_DATA/dblp` and `$EXPERT_FINDING_DATA/stats` (the on-disk
//! dataset format) and fail when the data is absent.

mod common;

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use expertfind::corpus::{document_network, toy_dataset, Dataset};
use expertfind::eval::{auc, average_precision, evaluate, precision_at_k, relevance, EvalOptions, EvalReport};
use expertfind::ingest::{build_stackexchange, load_dataset, parse_posts, IngestParams};
use expertfind::models::{
    lsa_meta_embedding, pre_aggregate, PanopticModel, PostAggModel, PreAggModel, PropagationModel,
    PropagationParams, RandomModel, RankingModel, VotingModel,
};
use expertfind::textrep::{lsa, tfidf, LsaOptions, Representation, RepresentationKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:.1?}, limit {limit:?}"))?;
    Ok(took)
}

fn metric_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..1000 {
        let n = rng.random_range(1..=12);
        let levels = rng.random_range(1..=6);
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64 * 0.37).collect();
        let rel: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
        let k = rng.random_range(1..=12);
        ensure(auc(&scores, &rel) == common::brute_auc(&scores, &rel), || format!("auc differs on case {case}"))?;
        ensure(average_precision(&scores, &rel) == common::brute_ap(&scores, &rel), || {
            format!("ap differs on case {case}")
        })?;
        ensure(
            precision_at_k(&scores, &rel, k) == common::brute_precision(&scores, &rel, k),
            || format!("p@k differs on case {case}"),
        )?;
    }
    let took = within(Duration::from_secs(10), start)?;
    Ok(format!("1000 instances identical, {took:.2?}"))
}

fn propagation_vs_linear_solve() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for net in 0..200 {
        let n_d = rng.random_range(1..=8);
        let n_c = rng.random_range(1..=(12 - n_d).min(6));
        let (ds, dc, dd) = common::random_dataset(&mut rng, n_d, n_c);
        let rows: Vec<Vec<f64>> = (0..n_d)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let rep = Arc::new(Representation::from_rows(RepresentationKind::External, &rows).unwrap());

        let sym = common::dense_zip(&dd, &common::dense_t(&dd, n_d), f64::max);
        let adj = common::dense_blocks(&sym, &dc, &common::dense_t(&dc, n_c), &vec![vec![0.0; n_c]; n_c]);
        let q = rng.random_range(0..n_d);
        // restart distribution computed from scratch
        let clipped: Vec<f64> = rows.iter().map(|r| common::dense_cosine(&rows[q], r).max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        let mut p0 = vec![0.0; n_d + n_c];
        for d in 0..n_d {
            p0[d] = if total > 0.0 { clipped[d] / total } else { 1.0 / n_d as f64 };
        }

        for alpha in [0.15, 0.5, 0.9] {
            let params = PropagationParams {
                restart_prob: alpha,
                tol: 1e-12,
                max_iter: 10_000,
            };
            let model = PropagationModel::new(&ds, rep.clone(), params).map_err(|e| e.to_string())?;
            let got = model.score_query_detailed(q).map_err(|e| e.to_string())?;
            ensure(got.converged, || format!("network {net}, alpha {alpha}: no convergence"))?;
            let want = common::rwr_direct(&adj, &p0, alpha);
            for (x, y) in got.distribution.iter().zip(&want) {
                worst = worst.max((x - y).abs());
            }
            ensure(worst <= 1e-6, || format!("network {net}, alpha {alpha}: max error {worst:.2e}"))?;
        }
    }
    let took = within(Duration::from_secs(30), start)?;
    Ok(format!("200 networks x 3 restart probabilities, max error {worst:.1e}, {took:.2?}"))
}

fn matrix_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0..200 {
        let n_d = rng.random_range(1..=20);
        let n_c = rng.random_range(1..=10);
        let (ds, dc, dd) = common::random_dataset(&mut rng, n_d, n_c);
        let dct = common::dense_t(&dc, n_c);
        let sym = common::dense_zip(&dd, &common::dense_t(&dd, n_d), f64::max);
        let a_d = common::dense_zip(&common::dense_mul(&dc, &dct), &sym, |a, b| a + b);
        let a_c = common::dense_mul(&dct, &dc);
        let got_d = document_network(&ds).map_err(|e| e.to_string())?;
        ensure(got_d.to_dense() == a_d, || format!("document network differs on case {case}"))?;
        let meta = pre_aggregate(&ds).map_err(|e| e.to_string())?;
        ensure(meta.adjacency.to_dense() == common::dense_blocks(&a_d, &dc, &dct, &a_c), || {
            format!("meta-network differs on case {case}")
        })?;
    }
    Ok("200 random instances up to 20x10, entrywise equal".into())
}

/// Emits fixed rankings for some queries.
struct FixedRankings(Vec<(usize, Vec<usize>)>, usize);

impl RankingModel for FixedRankings {
    fn name(&self) -> String {
        "fixed".into()
    }
    fn n_candidates(&self) -> usize {
        self.1
    }
    fn score_query(&self, q: usize) -> expertfind::Result<Vec<f64>> {
        let (_, order) = self.0.iter().find(|(d, _)| *d == q).expect("query has a ranking");
        let mut scores = vec![0.0; self.1];
        for (pos, &c) in order.iter().enumerate() {
            scores[c] = (self.1 - pos) as f64;
        }
        Ok(scores)
    }
}

fn toy_golden() -> Outcome {
    let mut ds = toy_dataset();
    // D1 -> C3 C4 C5 C1 C2, D6 -> C4 C5 C3 C2 C1
    let model = FixedRankings(vec![(0, vec![2, 3, 4, 0, 1]), (5, vec![3, 4, 2, 1, 0])], 5);
    ds.queries = vec![0, 5];
    let report = evaluate(&model, &ds, &EvalOptions::default()).map_err(|e| e.to_string())?;
    ensure(report.n_queries() == 2, || format!("{} queries evaluated", report.n_queries()))?;
    for q in &report.per_query {
        ensure(q.auc == 1.0 && q.ap == 1.0, || format!("query D{}: auc {} ap {}", q.query + 1, q.auc, q.ap))?;
    }
    let rel = relevance(&ds, 0).map_err(|e| e.to_string())?;
    ensure(rel == [false, false, true, true, false], || format!("D1 relevance {rel:?}"))?;
    Ok("D1 and D6: AUC = AP = 1".into())
}

fn data_dir(name: &str) -> Result<PathBuf, String> {
    let root = std::env::var_os("EXPERT_FINDING_DATA")
        .ok_or_else(|| format!("EXPERT_FINDING_DATA is not set; the {name} dataset is required"))?;
    let dir = PathBuf::from(root).join(name);
    ensure(dir.join("manifest.json").is_file(), || format!("{} has no manifest.json", dir.display()))?;
    Ok(dir)
}

fn load(name: &str) -> Result<Dataset, String> {
    load_dataset(&data_dir(name)?).map_err(|e| e.to_string())
}

fn run(model: &dyn RankingModel, ds: &Dataset) -> Result<EvalReport, String> {
    evaluate(model, ds, &EvalOptions::default()).map_err(|e| e.to_string())
}

fn doc_tfidf(ds: &Dataset) -> Result<Arc<Representation>, String> {
    let texts: Vec<&str> = ds.documents.iter().map(|d| d.text.as_str()).collect();
    Ok(Arc::new(tfidf(&texts).map_err(|e| e.to_string())?.1))
}

/// The published DBLP extract, recognized by its entity counts.
fn load_dblp() -> Result<Dataset, String> {
    let ds = load("dblp")?;
    let counts = (ds.n_candidates(), ds.n_documents(), ds.label_names.len(), ds.queries.len(), ds.n_experts());
    ensure(counts == (707, 1641, 7, 114, 199), || format!("unexpected DBLP shape {counts:?}"))?;
    Ok(ds)
}

fn dblp_reproduction() -> Outcome {
    let start = Instant::now();
    let ds = load_dblp()?;
    let tf = doc_tfidf(&ds)?;

    let seeds = 10;
    let mut random = 0.0;
    for seed in 0..seeds {
        random += run(&RandomModel::new(&ds, seed), &ds)?.auc.mean;
    }
    let random = 100.0 * random / seeds as f64;
    let panoptic = 100.0 * run(&PanopticModel::new(&ds).map_err(|e| e.to_string())?, &ds)?.auc.mean;
    let voting = 100.0 * run(&VotingModel::new(&ds, tf.clone()).map_err(|e| e.to_string())?, &ds)?.auc.mean;
    let propagation = PropagationModel::new(&ds, tf, PropagationParams::default()).map_err(|e| e.to_string())?;
    let propagation = 100.0 * run(&propagation, &ds)?.auc.mean;
    let summary = format!("random {random:.2}, panoptic {panoptic:.2}, voting {voting:.2}, propagation {propagation:.2}");

    ensure((random - 50.0).abs() <= 2.0, || format!("random outside 50 +/- 2: {summary}"))?;
    ensure(propagation > voting && voting > panoptic && panoptic > random, || format!("ordering violated: {summary}"))?;
    for (name, got, want) in [("panoptic", panoptic, 74.06), ("voting", voting, 78.60), ("propagation", propagation, 79.26)] {
        ensure((got - want).abs() <= 5.0, || format!("{name} {got:.2} not within 5 of {want}: {summary}"))?;
    }
    let took = within(Duration::from_secs(300), start)?;
    Ok(format!("{summary}, {took:.1?}"))
}

fn stats_reproduction() -> Outcome {
    let start = Instant::now();
    let ds = load("stats")?;
    let counts = (ds.n_candidates(), ds.n_documents(), ds.label_names.len(), ds.queries.len());
    ensure(counts == (5765, 14834, 59, 3966), || format!("unexpected Stats shape {counts:?}"))?;
    let tf = doc_tfidf(&ds)?;
    let voting = run(&VotingModel::new(&ds, tf.clone()).map_err(|e| e.to_string())?, &ds)?;
    let propagation = PropagationModel::new(&ds, tf, PropagationParams::default()).map_err(|e| e.to_string())?;
    let propagation = run(&propagation, &ds)?;
    let (v_auc, p_p10) = (100.0 * voting.auc.mean, 100.0 * propagation.p_at_k.mean);
    let summary = format!("voting AUC {v_auc:.2}, propagation P@10 {p_p10:.2}");
    ensure((v_auc - 84.96).abs() <= 5.0, || format!("voting AUC not within 5 of 84.96: {summary}"))?;
    ensure(p_p10 > 85.0, || format!("propagation P@10 not above 85: {summary}"))?;
    let took = within(Duration::from_secs(1800), start)?;
    Ok(format!("{summary}, {took:.1?}"))
}

/// Voting, pre-agg and post-agg over LSA vectors of `dim` dimensions.
fn lsa_models(ds: &Dataset, dim: usize) -> Result<Vec<Box<dyn RankingModel>>, String> {
    let e = |e: expertfind::Error| e.to_string();
    let tf = doc_tfidf(ds)?;
    let doc_lsa = Arc::new(lsa(&tf, dim).map_err(e)?);
    Ok(vec![
        Box::new(VotingModel::new(ds, doc_lsa.clone()).map_err(e)?),
        Box::new(PreAggModel::new(ds, lsa_meta_embedding(dim, LsaOptions::default())).map_err(e)?),
        Box::new(PostAggModel::new(ds, doc_lsa).map_err(e)?),
    ])
}

fn check_lsa_invariants(ds: &Dataset, models: &[Box<dyn RankingModel>]) -> Result<Vec<EvalReport>, String> {
    let mut reports = Vec::new();
    for m in models {
        let aggregation = !m.name().starts_with("voting");
        for &q in &ds.queries {
            let s = m.score_query(q).map_err(|e| e.to_string())?;
            ensure(s.len() == ds.n_candidates(), || format!("{}: {} scores", m.name(), s.len()))?;
            ensure(s.iter().all(|x| x.is_finite()), || format!("{}: non-finite score", m.name()))?;
            if aggregation {
                ensure(s.iter().all(|x| (-1.0..=1.0).contains(x)), || format!("{}: cosine out of range", m.name()))?;
            }
        }
        let r = run(m.as_ref(), ds)?;
        ensure(r.n_queries() + r.n_skipped() == ds.queries.len(), || format!("{}: query count", m.name()))?;
        reports.push(r);
    }
    Ok(reports)
}

fn lsa_pipelines() -> Outcome {
    // invariants on synthetic data, which is always available
    let mut rng = ChaCha8Rng::seed_from_u64(256);
    for _ in 0..5 {
        let (ds, _, _) = common::random_dataset(&mut rng, 30, 12);
        check_lsa_invariants(&ds, &lsa_models(&ds, 256)?)?;
    }
    let toy = toy_dataset();
    check_lsa_invariants(&toy, &lsa_models(&toy, 256)?)?;

    let ds = load_dblp().map_err(|e| format!("synthetic invariants hold; {e}"))?;
    let reports = check_lsa_invariants(&ds, &lsa_models(&ds, 256)?)?;
    let summary: Vec<String> = reports.iter().map(|r| format!("{} {:.2}", r.model, 100.0 * r.auc.mean)).collect();
    for r in &reports {
        ensure(100.0 * r.auc.mean > 55.0, || format!("{} not above 55: {}", r.model, summary.join(", ")))?;
    }
    Ok(summary.join(", "))
}

fn ingestion() -> Outcome {
    let file = File::open(common::fixture("mini_posts.xml")).map_err(|e| e.to_string())?;
    let posts: Vec<_> = parse_posts(BufReader::new(file))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let params = IngestParams {
        min_tag_count: 2,
        ..IngestParams::default()
    };
    let (ds, _) = build_stackexchange(posts.into_iter().map(Ok), &params).map_err(|e| e.to_string())?;
    let ids: Vec<&str> = ds.documents.iter().map(|d| d.id.as_str()).collect();
    ensure(ids == ["1", "2", "3", "6", "7"], || format!("documents {ids:?}"))?;
    ensure(ds.candidates == ["100", "101"], || format!("candidates {:?}", ds.candidates))?;
    ensure(ds.label_names == ["stats"], || format!("labels {:?}", ds.label_names))?;
    ensure(ds.queries == [0, 3], || format!("queries {:?}", ds.queries))?;
    let expert = std::collections::BTreeSet::from([0]);
    ensure(ds.candidate_labels == [expert.clone(), expert], || format!("experts {:?}", ds.candidate_labels))?;
    let authorship: Vec<_> = ds.a_dc.triplets().collect();
    ensure(authorship == [(1, 0, 1.0), (2, 1, 1.0), (4, 1, 1.0)], || format!("a_dc {authorship:?}"))?;
    let links: Vec<_> = ds.a_dd.triplets().map(|(a, b, _)| (a, b)).collect();
    ensure(links == [(0, 1), (0, 2), (1, 0), (2, 0), (3, 4), (4, 3)], || format!("a_dd {links:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for dump in 0..100 {
        let n_questions = rng.random_range(5..60);
        let posts = common::random_posts(&mut rng, n_questions);
        let base = IngestParams {
            min_tag_count: 2,
            ..IngestParams::default()
        };
        let build = |p: &IngestParams| {
            let (ds, _) = build_stackexchange(posts.iter().cloned().map(Ok), p).unwrap();
            [ds.n_documents(), ds.n_candidates(), ds.queries.len(), ds.n_experts(), ds.label_names.len()]
        };
        let before = build(&base);
        let raised = [
            IngestParams { min_question_score: base.min_question_score + 3, ..base.clone() },
            IngestParams { min_answer_score: base.min_answer_score + 3, ..base.clone() },
            IngestParams { min_tag_count: base.min_tag_count + 2, ..base.clone() },
            IngestParams { expert_answer_score: base.expert_answer_score + 3, ..base.clone() },
        ];
        for p in &raised {
            let after = build(p);
            ensure(after.iter().zip(&before).all(|(a, b)| a <= b), || {
                format!("dump {dump}: {before:?} grew to {after:?} under {p:?}")
            })?;
        }
    }
    Ok("miniature dump exact; 100 random dumps monotone".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("metric oracle equivalence", metric_oracles),
        ("propagation vs dense linear solve", propagation_vs_linear_solve),
        ("matrix identities", matrix_identities),
        ("toy fixture golden rankings", toy_golden),
        ("DBLP reproduction", dblp_reproduction),
        ("Stats reproduction", stats_reproduction),
        ("LSA-256 aggregation pipelines", lsa_pipelines),
        ("Stack Exchange ingestion", ingestion),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
