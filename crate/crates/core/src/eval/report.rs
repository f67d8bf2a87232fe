use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{evaluate, EvalOptions, EvalReport};
use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::models::RankingModel;

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// One row per model and metric: `model metric mean std n_queries n_skipped`,
/// values in `[0, 1]`.
pub fn write_tsv(reports: &[EvalReport], path: &Path) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(out, "model\tmetric\tmean\tstd\tn_queries\tn_skipped").map_err(io)?;
    for r in reports {
        for (metric, s) in [("auc".to_string(), r.auc), (format!("p@{}", r.k), r.p_at_k), ("ap".to_string(), r.ap)] {
            writeln!(
                out,
                "{}\t{metric}\t{:.6}\t{:.6}\t{}\t{}",
                r.model,
                s.mean,
                s.std,
                r.n_queries(),
                r.n_skipped()
            )
            .map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

pub fn write_json(reports: &[EvalReport], path: &Path) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, reports).map_err(|e| Error::io(path, e.into()))?;
    out.flush().map_err(|e| Error::io(path, e))
}

/// `fpr,tpr` header followed by one line per grid point.
pub fn write_roc_csv(points: &[(f64, f64)], path: &Path) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(out, "fpr,tpr").map_err(io)?;
    for (f, t) in points {
        writeln!(out, "{f:.2},{t:.6}").map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Evaluates `model` and writes its averaged ROC curve as CSV.
pub fn roc_export<M: RankingModel + ?Sized>(model: &M, dataset: &Dataset, path: &Path) -> Result<EvalReport> {
    let opts = EvalOptions {
        roc: true,
        ..EvalOptions::default()
    };
    let report = evaluate(model, dataset, &opts)?;
    write_roc_csv(report.roc.as_deref().unwrap_or_default(), path)?;
    Ok(report)
}

/// `AUC (std)  P@k (std)  AP (std)`, scaled by 100.
pub fn format_table_row(r: &EvalReport) -> String {
    let cell = |s: super::Summary| format!("{:05.2} ({:05.2})", 100.0 * s.mean, 100.0 * s.std);
    format!("{:<24} {}  {}  {}", r.model, cell(r.auc), cell(r.p_at_k), cell(r.ap))
}
