//! Run configuration: command-line flags merged over an optional key=value
//! file, then checked for a supported model/representation pairing.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use expertfind::textrep::DEFAULT_LSA_DIM;

/// Default dataset directory when neither flag nor config names one.
pub const DATA_ENV: &str = "EXPERT_FINDING_DATA";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Random,
    Panoptic,
    Voting,
    Propagation,
    PreAgg,
    PostAgg,
    Oracle,
}

impl ModelKind {
    fn parse(name: &str, agg: Option<&str>) -> Result<Self> {
        Ok(match name {
            "random" => ModelKind::Random,
            "panoptic" => ModelKind::Panoptic,
            "voting" => ModelKind::Voting,
            "propagation" => ModelKind::Propagation,
            "pre-agg" => ModelKind::PreAgg,
            "post-agg" => ModelKind::PostAgg,
            "aggregation" => match agg {
                Some("pre") => ModelKind::PreAgg,
                Some("post") => ModelKind::PostAgg,
                Some(other) => bail!("--agg must be `pre` or `post`, got `{other}`"),
                None => bail!("model `aggregation` needs --agg pre|post"),
            },
            "oracle" => ModelKind::Oracle,
            other => bail!(
                "unknown model `{other}` (expected random, panoptic, voting, propagation, pre-agg, post-agg, aggregation or oracle)"
            ),
        })
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Random => "random",
            ModelKind::Panoptic => "panoptic",
            ModelKind::Voting => "voting",
            ModelKind::Propagation => "propagation",
            ModelKind::PreAgg => "pre-agg",
            ModelKind::PostAgg => "post-agg",
            ModelKind::Oracle => "oracle",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RepSpec {
    Tfidf,
    Lsa(usize),
    External(PathBuf),
}

impl FromStr for RepSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "tfidf" => Ok(RepSpec::Tfidf),
            None if s == "lsa" => Ok(RepSpec::Lsa(DEFAULT_LSA_DIM)),
            Some(("lsa", dim)) => {
                let dim: usize = dim.parse().with_context(|| format!("bad LSA dimension `{dim}`"))?;
                if dim == 0 {
                    bail!("LSA dimension must be at least 1");
                }
                Ok(RepSpec::Lsa(dim))
            }
            Some(("external", path)) if !path.is_empty() => Ok(RepSpec::External(PathBuf::from(path))),
            _ => bail!("representation must be tfidf, lsa[:DIM] or external:PATH, got `{s}`"),
        }
    }
}

impl fmt::Display for RepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepSpec::Tfidf => f.write_str("tfidf"),
            RepSpec::Lsa(dim) => write!(f, "lsa:{dim}"),
            RepSpec::External(p) => write!(f, "external:{}", p.display()),
        }
    }
}

/// Flag values before merging; `None` means not given on the command line.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub dataset: Option<PathBuf>,
    pub model: Option<String>,
    pub agg: Option<String>,
    pub rep: Option<String>,
    pub alpha: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub k: Option<usize>,
    pub out: Option<PathBuf>,
    pub exclude_query_authors: bool,
    pub threads: Option<usize>,
    pub suite: bool,
    pub json: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// `None` for models that take no representation.
    pub rep: Option<RepSpec>,
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.rep {
            Some(rep) => write!(f, "{} ({rep})", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

impl ModelSpec {
    /// Rejects pairings the models do not support.
    pub fn new(kind: ModelKind, rep: Option<RepSpec>) -> Result<Self> {
        let rep = match (kind, rep) {
            (ModelKind::Random | ModelKind::Oracle, None) => None,
            (ModelKind::Random | ModelKind::Oracle, Some(r)) => {
                bail!("model `{kind}` takes no representation, got --rep {r}")
            }
            (ModelKind::Panoptic, None | Some(RepSpec::Tfidf)) => Some(RepSpec::Tfidf),
            (ModelKind::Panoptic, Some(r)) => bail!("model `panoptic` works on tf-idf only, got --rep {r}"),
            (ModelKind::Voting | ModelKind::Propagation, r) => Some(r.unwrap_or(RepSpec::Tfidf)),
            (ModelKind::PreAgg | ModelKind::PostAgg, None) => Some(RepSpec::Lsa(DEFAULT_LSA_DIM)),
            (ModelKind::PreAgg | ModelKind::PostAgg, Some(RepSpec::Tfidf)) => {
                bail!("model `{kind}` needs an embedding: use --rep lsa[:DIM] or --rep external:PATH")
            }
            (ModelKind::PreAgg | ModelKind::PostAgg, Some(r)) => Some(r),
        };
        Ok(ModelSpec { kind, rep })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dataset: PathBuf,
    pub models: Vec<ModelSpec>,
    pub alpha: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub k: usize,
    pub out: PathBuf,
    pub exclude_query_authors: bool,
    pub threads: Option<usize>,
    pub json: bool,
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected key = value", path.display(), i + 1))?;
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            bail!("{}:{}: unknown key `{key}`", path.display(), i + 1);
        }
        let value = value.trim().trim_matches('"').to_string();
        if map.insert(key.clone(), value).is_some() {
            bail!("{}:{}: duplicate key `{key}`", path.display(), i + 1);
        }
    }
    Ok(map)
}

const KEYS: [&str; 14] = [
    "dataset",
    "model",
    "agg",
    "rep",
    "alpha",
    "tol",
    "max-iter",
    "seed",
    "k",
    "out",
    "exclude-query-authors",
    "threads",
    "suite",
    "json",
];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| anyhow!("config key `{key}`: {e}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => bail!("config key `{key}`: expected true or false, got `{value}`"),
    }
}

/// The tf-idf battery: random, panoptic, voting and propagation.
pub fn suite() -> Vec<ModelSpec> {
    [ModelKind::Random, ModelKind::Panoptic, ModelKind::Voting, ModelKind::Propagation]
        .into_iter()
        .map(|kind| ModelSpec::new(kind, None).expect("supported pairing"))
        .collect()
}

impl RunConfig {
    /// Flags win over file values; file values win over defaults.
    pub fn resolve(flags: RunOverrides, file: &BTreeMap<String, String>) -> Result<Self> {
        let get = |key: &str| file.get(key).map(String::as_str);
        fn pick<T: FromStr>(flag: Option<T>, key: &str, file: Option<&str>) -> Result<Option<T>>
        where
            T::Err: fmt::Display,
        {
            match (flag, file) {
                (Some(v), _) => Ok(Some(v)),
                (None, Some(s)) => parse_value(key, s).map(Some),
                (None, None) => Ok(None),
            }
        }
        let flag_or_file = |flag: bool, key: &str| -> Result<bool> {
            if flag {
                return Ok(true);
            }
            get(key).map_or(Ok(false), |v| parse_bool(key, v))
        };

        let dataset = flags
            .dataset
            .or_else(|| get("dataset").map(PathBuf::from))
            .or_else(|| std::env::var_os(DATA_ENV).map(PathBuf::from))
            .ok_or_else(|| anyhow!("no dataset: pass --dataset, set it in the config, or set EXPERT_FINDING_DATA"))?;
        let suite_requested = flag_or_file(flags.suite, "suite")?;
        let model = flags.model.or_else(|| get("model").map(str::to_string));
        let agg = flags.agg.or_else(|| get("agg").map(str::to_string));
        let rep = flags.rep.or_else(|| get("rep").map(str::to_string));

        let models = if suite_requested {
            if model.is_some() || rep.is_some() {
                log::warn!("--suite runs the tf-idf baselines; --model and --rep are ignored");
            }
            suite()
        } else {
            let name = model.ok_or_else(|| anyhow!("no model: pass --model or --suite"))?;
            let rep = rep.as_deref().map(RepSpec::from_str).transpose()?;
            vec![ModelSpec::new(ModelKind::parse(&name, agg.as_deref())?, rep)?]
        };

        let config = RunConfig {
            dataset,
            models,
            alpha: pick(flags.alpha, "alpha", get("alpha"))?.unwrap_or(0.5),
            tol: pick(flags.tol, "tol", get("tol"))?.unwrap_or(1e-8),
            max_iter: pick(flags.max_iter, "max-iter", get("max-iter"))?.unwrap_or(200),
            seed: pick(flags.seed, "seed", get("seed"))?.unwrap_or(0),
            k: pick(flags.k, "k", get("k"))?.unwrap_or(10),
            out: flags.out.or_else(|| get("out").map(PathBuf::from)).unwrap_or_else(|| "results".into()),
            exclude_query_authors: flag_or_file(flags.exclude_query_authors, "exclude-query-authors")?,
            threads: pick(flags.threads, "threads", get("threads"))?,
            json: flag_or_file(flags.json, "json")?,
        };
        if config.k == 0 {
            bail!("k must be at least 1");
        }
        if config.threads == Some(0) {
            bail!("threads must be at least 1");
        }
        Ok(config)
    }
}
