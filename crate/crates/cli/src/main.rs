mod config;

use std::collections::HashSet;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use expertfind::corpus::Dataset;
use expertfind::eval::{evaluate, format_table_row, write_json, write_roc_csv, write_tsv, EvalOptions, EvalReport};
use expertfind::ingest::{build_stackexchange, load_dataset, parse_posts, save_dataset, IngestParams};
use expertfind::models::{
    lsa_meta_embedding, OracleModel, PanopticModel, PostAggModel, PreAggModel, PropagationModel, PropagationParams,
    RandomModel, RankingModel, VotingModel,
};
use expertfind::textrep::{load_embeddings, lsa_with, tfidf, LsaOptions, Representation};

use config::{read_config_file, ModelKind, ModelSpec, RepSpec, RunConfig, RunOverrides};

#[derive(Parser)]
#[command(name = "expertfind", version, about = "Expert finding benchmarks over document networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a dataset directory and check its invariants.
    Validate {
        /// Dataset directory [default: $EXPERT_FINDING_DATA]
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Build a dataset from a Stack Exchange Posts.xml dump.
    IngestStackexchange(IngestArgs),
    /// Evaluate one model (or the tf-idf suite) and write reports.
    Run(RunArgs),
    /// Write the averaged ROC curve of one model as CSV.
    Roc {
        #[command(flatten)]
        run: RunArgs,
        /// CSV output file.
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct IngestArgs {
    /// Posts.xml of a Stack Exchange data dump.
    #[arg(long)]
    posts: PathBuf,
    /// Output dataset directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    min_question_score: i64,
    #[arg(long, default_value_t = 10)]
    min_answer_score: i64,
    #[arg(long, default_value_t = 50)]
    min_tag_count: usize,
    #[arg(long, default_value_t = 10)]
    expert_answer_score: i64,
    /// Use question bodies without their titles.
    #[arg(long)]
    no_title: bool,
    /// Keep only answers reaching --min-answer-score as documents.
    #[arg(long)]
    high_score_answers_only: bool,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// key = value file with the same keys as the long flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset directory [default: $EXPERT_FINDING_DATA]
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// random, panoptic, voting, propagation, pre-agg, post-agg, aggregation or oracle.
    #[arg(long)]
    model: Option<String>,
    /// Scheme for `--model aggregation`: pre or post.
    #[arg(long)]
    agg: Option<String>,
    /// tfidf, lsa[:DIM] or external:PATH.
    #[arg(long)]
    rep: Option<String>,
    /// Restart probability of the propagation walk [default: 0.5]
    #[arg(long)]
    alpha: Option<f64>,
    /// L1 convergence tolerance of the propagation walk [default: 1e-8]
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap of the propagation walk [default: 200]
    #[arg(long)]
    max_iter: Option<usize>,
    /// Seed of the random model and of randomized SVD [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Precision cutoff [default: 10]
    #[arg(long)]
    k: Option<usize>,
    /// Report directory [default: results]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Remove the query document's authors from its ranking.
    #[arg(long)]
    exclude_query_authors: bool,
    /// Worker threads [default: available cores]
    #[arg(long)]
    threads: Option<usize>,
    /// Run random, panoptic, voting and propagation on tf-idf.
    #[arg(long)]
    suite: bool,
    /// Also write report.json.
    #[arg(long)]
    json: bool,
}

impl RunArgs {
    fn resolve(self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => read_config_file(path)?,
            None => Default::default(),
        };
        let flags = RunOverrides {
            dataset: self.dataset,
            model: self.model,
            agg: self.agg,
            rep: self.rep,
            alpha: self.alpha,
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
            k: self.k,
            out: self.out,
            exclude_query_authors: self.exclude_query_authors,
            threads: self.threads,
            suite: self.suite,
            json: self.json,
        };
        let cfg = RunConfig::resolve(flags, &file)?;
        if let Some(n) = cfg.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("cannot configure the thread pool")?;
        }
        Ok(cfg)
    }
}

fn dataset_dir(flag: Option<PathBuf>) -> Result<PathBuf> {
    flag.or_else(|| std::env::var_os(config::DATA_ENV).map(PathBuf::from))
        .with_context(|| format!("no dataset: pass --dataset or set {}", config::DATA_ENV))
}

fn load(dir: &Path) -> Result<Dataset> {
    load_dataset(dir).with_context(|| format!("cannot load dataset {}", dir.display()))
}

fn print_summary(ds: &Dataset) {
    println!("candidates\tdocuments\tlabels\tqueries\texperts");
    println!(
        "{}\t{}\t{}\t{}\t{}",
        ds.n_candidates(),
        ds.n_documents(),
        ds.label_names.len(),
        ds.queries.len(),
        ds.n_experts()
    );
}

fn cmd_validate(dataset: Option<PathBuf>) -> Result<()> {
    let dir = dataset_dir(dataset)?;
    let ds = load(&dir)?;
    print_summary(&ds);
    println!("{}: valid", dir.display());
    Ok(())
}

fn cmd_ingest(args: IngestArgs) -> Result<()> {
    let params = IngestParams {
        min_question_score: args.min_question_score,
        min_answer_score: args.min_answer_score,
        min_tag_count: args.min_tag_count,
        expert_answer_score: args.expert_answer_score,
        include_title: !args.no_title,
        keep_all_answers: !args.high_score_answers_only,
    };
    let file = File::open(&args.posts).with_context(|| format!("cannot open {}", args.posts.display()))?;
    let mut reader = parse_posts(BufReader::new(file));
    let (ds, log) = build_stackexchange(reader.by_ref(), &params)
        .with_context(|| format!("cannot ingest {}", args.posts.display()))?;
    save_dataset(&ds, &args.out).with_context(|| format!("cannot write {}", args.out.display()))?;
    print_summary(&ds);
    eprintln!(
        "read {} questions and {} answers ({} other rows skipped); kept {} questions and {} answers; \
         dropped {} ownerless and {} orphan answers",
        log.questions_read,
        log.answers_read,
        reader.skipped_rows(),
        log.retained_questions,
        log.included_answers,
        log.ownerless_answers,
        log.orphan_answers
    );
    Ok(())
}

/// Builds models for one dataset, sharing the tf-idf vectors between them.
struct ModelFactory<'a> {
    dataset: Arc<Dataset>,
    cfg: &'a RunConfig,
    tfidf: Option<Arc<Representation>>,
}

impl<'a> ModelFactory<'a> {
    fn new(dataset: Arc<Dataset>, cfg: &'a RunConfig) -> Self {
        ModelFactory {
            dataset,
            cfg,
            tfidf: None,
        }
    }

    fn lsa_options(&self) -> LsaOptions {
        LsaOptions {
            seed: self.cfg.seed,
            ..LsaOptions::default()
        }
    }

    fn tfidf(&mut self) -> Result<Arc<Representation>> {
        if let Some(rep) = &self.tfidf {
            return Ok(rep.clone());
        }
        let texts: Vec<&str> = self.dataset.documents.iter().map(|d| d.text.as_str()).collect();
        let rep = Arc::new(tfidf(&texts)?.1);
        self.tfidf = Some(rep.clone());
        Ok(rep)
    }

    fn documents(&mut self, rep: &RepSpec) -> Result<Arc<Representation>> {
        Ok(match rep {
            RepSpec::Tfidf => self.tfidf()?,
            RepSpec::Lsa(dim) => Arc::new(lsa_with(&*self.tfidf()?, *dim, &self.lsa_options())?),
            RepSpec::External(path) => {
                let ids: Vec<&str> = self.dataset.documents.iter().map(|d| d.id.as_str()).collect();
                Arc::new(load_embeddings(path, &ids)?)
            }
        })
    }

    fn build(&mut self, spec: &ModelSpec) -> Result<Box<dyn RankingModel>> {
        let ds = self.dataset.clone();
        let rep = spec.rep.as_ref();
        let params = PropagationParams {
            restart_prob: self.cfg.alpha,
            tol: self.cfg.tol,
            max_iter: self.cfg.max_iter,
        };
        Ok(match (spec.kind, rep) {
            (ModelKind::Random, _) => Box::new(RandomModel::new(&ds, self.cfg.seed)),
            (ModelKind::Oracle, _) => Box::new(OracleModel::new(ds)),
            (ModelKind::Panoptic, _) => Box::new(PanopticModel::new(&ds)?),
            (ModelKind::Voting, Some(rep)) => Box::new(VotingModel::new(&ds, self.documents(rep)?)?),
            (ModelKind::Propagation, Some(rep)) => Box::new(PropagationModel::new(&ds, self.documents(rep)?, params)?),
            (ModelKind::PostAgg, Some(rep)) => Box::new(PostAggModel::new(&ds, self.documents(rep)?)?),
            (ModelKind::PreAgg, Some(RepSpec::Lsa(dim))) => {
                Box::new(PreAggModel::new(&ds, lsa_meta_embedding(*dim, self.lsa_options()))?)
            }
            (ModelKind::PreAgg, Some(RepSpec::External(path))) => {
                // one vector per document, then one per candidate
                let ids: Vec<&str> = ds
                    .documents
                    .iter()
                    .map(|d| d.id.as_str())
                    .chain(ds.candidates.iter().map(String::as_str))
                    .collect();
                let mut seen = HashSet::new();
                if let Some(dup) = ids.iter().find(|id| !seen.insert(**id)) {
                    bail!("id `{dup}` names both a document and a candidate; pre-agg embeddings need distinct ids");
                }
                Box::new(PreAggModel::from_representation(&ds, load_embeddings(path, &ids)?)?)
            }
            (kind, rep) => bail!("unsupported model/representation pair: {kind} with {rep:?}"),
        })
    }
}

fn evaluate_all(cfg: &RunConfig, roc: bool) -> Result<Vec<EvalReport>> {
    let dataset = Arc::new(load(&cfg.dataset)?);
    let mut factory = ModelFactory::new(dataset.clone(), cfg);
    let opts = EvalOptions {
        k: cfg.k,
        exclude_query_authors: cfg.exclude_query_authors,
        roc,
    };
    let mut reports = Vec::new();
    for spec in &cfg.models {
        let start = Instant::now();
        let model = factory.build(spec).with_context(|| format!("cannot build {spec}"))?;
        let report = evaluate(&model, &dataset, &opts).with_context(|| format!("evaluating {spec}"))?;
        log::info!("{spec}: {} queries in {:.2?}", report.n_queries(), start.elapsed());
        if report.n_skipped() > 0 {
            eprintln!("{}: skipped {} queries without a relevant or non-relevant candidate", report.model, report.n_skipped());
        }
        reports.push(report);
    }
    Ok(reports)
}

fn print_table(reports: &[EvalReport]) {
    let k = reports.first().map_or(10, |r| r.k);
    println!("{:<24} {:<13}  {:<13}  AP", "model", "AUC", format!("P@{k}"));
    for r in reports {
        println!("{}", format_table_row(r));
    }
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let cfg = args.resolve()?;
    let reports = evaluate_all(&cfg, false)?;
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("cannot create {}", cfg.out.display()))?;
    write_tsv(&reports, &cfg.out.join("report.tsv"))?;
    if cfg.json {
        write_json(&reports, &cfg.out.join("report.json"))?;
    }
    print_table(&reports);
    Ok(())
}

fn cmd_roc(args: RunArgs, output: &Path) -> Result<()> {
    let cfg = args.resolve()?;
    if cfg.models.len() != 1 {
        bail!("roc takes a single model, not --suite");
    }
    let reports = evaluate_all(&cfg, true)?;
    let points = reports[0].roc.as_deref().unwrap_or_default();
    write_roc_csv(points, output)?;
    print_table(&reports);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { dataset } => cmd_validate(dataset),
        Command::IngestStackexchange(args) => cmd_ingest(args),
        Command::Run(args) => cmd_run(args),
        Command::Roc { run, output } => cmd_roc(run, &output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
