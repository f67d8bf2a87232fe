//! On-disk dataset directory.
//!
//! ```text
//! manifest.json        counts, label names, format version
//! documents.tsv        doc_id<TAB>text
//! candidates.tsv       candidate_id
//! a_dc.mtx, a_dd.mtx   MatrixMarket coordinate
//! doc_labels.tsv       doc_id<TAB>label,label,...
//! candidate_labels.tsv candidate_id<TAB>label,label,...
//! queries.tsv          doc_id
//! ```
//!
//! Backslash, tab, newline and carriage return inside ids and texts are
//! written as `\\`, `\t`, `\n` and `\r`.

use std::collections::{BTreeSet, HashMap};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::mtx::{read_matrix_market, write_matrix_market};
use crate::corpus::{Dataset, Document};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

pub const MANIFEST: &str = "manifest.json";
pub const DOCUMENTS: &str = "documents.tsv";
pub const CANDIDATES: &str = "candidates.tsv";
pub const A_DC: &str = "a_dc.mtx";
pub const A_DD: &str = "a_dd.mtx";
pub const DOC_LABELS: &str = "doc_labels.tsv";
pub const CANDIDATE_LABELS: &str = "candidate_labels.tsv";
pub const QUERIES: &str = "queries.tsv";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub n_documents: usize,
    pub n_candidates: usize,
    pub n_queries: usize,
    pub label_names: Vec<String>,
}

pub fn escape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

pub fn unescape_field(s: &str) -> std::result::Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(ch) = chars.next() {
        if ch != '\\' {
            out.push(ch);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => return Err(format!("unknown escape \\{other}")),
            None => return Err("dangling backslash at end of field".into()),
        }
    }
    Ok(out)
}

/// Lines of a TSV file with their 1-based numbers; trailing `\r` removed and
/// blank lines skipped.
fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let mut line = line.map_err(|e| Error::io(path, e))?;
        if line.ends_with('\r') {
            line.pop();
        }
        if !line.is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

fn id_index<'a>(ids: impl Iterator<Item = &'a str>, path: &Path) -> Result<HashMap<&'a str, usize>> {
    let mut map = HashMap::new();
    for (i, id) in ids.enumerate() {
        if map.insert(id, i).is_some() {
            return Err(Error::load(path, Some(i + 1), format!("duplicate id {id:?}")));
        }
    }
    Ok(map)
}

fn read_labels(
    path: &Path,
    ids: &HashMap<&str, usize>,
    label_index: &HashMap<&str, usize>,
    n: usize,
) -> Result<Vec<BTreeSet<usize>>> {
    let mut labels = vec![BTreeSet::new(); n];
    for (line, text) in read_lines(path)? {
        let (id, names) = text.split_once('\t').unwrap_or((text.as_str(), ""));
        let id = unescape_field(id).map_err(|m| Error::load(path, Some(line), m))?;
        let &entity = ids
            .get(id.as_str())
            .ok_or_else(|| Error::load(path, Some(line), format!("unknown id {id:?}")))?;
        for name in names.split(',').filter(|s| !s.is_empty()) {
            let &label = label_index
                .get(name)
                .ok_or_else(|| Error::load(path, Some(line), format!("label {name:?} not in manifest")))?;
            labels[entity].insert(label);
        }
    }
    Ok(labels)
}

/// Reads a dataset directory written by [`save_dataset`] (or converted to the
/// same layout).
pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let file = |name: &str| -> PathBuf { dir.join(name) };

    let manifest_path = file(MANIFEST);
    let raw = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: Manifest =
        serde_json::from_str(&raw).map_err(|e| Error::load(&manifest_path, Some(e.line()), e.to_string()))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::load(
            &manifest_path,
            None,
            format!("unsupported format version {}", manifest.format_version),
        ));
    }

    let docs_path = file(DOCUMENTS);
    let mut documents = Vec::with_capacity(manifest.n_documents);
    for (line, text) in read_lines(&docs_path)? {
        let (id, body) = text
            .split_once('\t')
            .ok_or_else(|| Error::load(&docs_path, Some(line), "expected doc_id<TAB>text"))?;
        if body.contains('\t') {
            return Err(Error::load(&docs_path, Some(line), "unescaped tab in text"));
        }
        let id = unescape_field(id).map_err(|m| Error::load(&docs_path, Some(line), m))?;
        let body = unescape_field(body).map_err(|m| Error::load(&docs_path, Some(line), m))?;
        documents.push(Document::new(id, body));
    }
    if documents.len() != manifest.n_documents {
        return Err(Error::load(
            &docs_path,
            None,
            format!("manifest announces {} documents, found {}", manifest.n_documents, documents.len()),
        ));
    }

    let cand_path = file(CANDIDATES);
    let mut candidates = Vec::with_capacity(manifest.n_candidates);
    for (line, text) in read_lines(&cand_path)? {
        candidates.push(unescape_field(&text).map_err(|m| Error::load(&cand_path, Some(line), m))?);
    }
    if candidates.len() != manifest.n_candidates {
        return Err(Error::load(
            &cand_path,
            None,
            format!("manifest announces {} candidates, found {}", manifest.n_candidates, candidates.len()),
        ));
    }

    let a_dc = read_matrix_market(&file(A_DC))?;
    let a_dd = read_matrix_market(&file(A_DD))?;
    for (name, m, rows, cols) in [
        (A_DC, &a_dc, documents.len(), candidates.len()),
        (A_DD, &a_dd, documents.len(), documents.len()),
    ] {
        if m.n_rows() != rows || m.n_cols() != cols {
            return Err(Error::load(
                file(name),
                None,
                format!("matrix is {}x{}, expected {rows}x{cols}", m.n_rows(), m.n_cols()),
            ));
        }
    }

    let doc_ids = id_index(documents.iter().map(|d| d.id.as_str()), &docs_path)?;
    let cand_ids = id_index(candidates.iter().map(String::as_str), &cand_path)?;
    let label_index = id_index(manifest.label_names.iter().map(String::as_str), &manifest_path)?;
    let doc_labels = read_labels(&file(DOC_LABELS), &doc_ids, &label_index, documents.len())?;
    let candidate_labels = read_labels(&file(CANDIDATE_LABELS), &cand_ids, &label_index, candidates.len())?;

    let q_path = file(QUERIES);
    let mut queries = Vec::with_capacity(manifest.n_queries);
    for (line, text) in read_lines(&q_path)? {
        let id = unescape_field(&text).map_err(|m| Error::load(&q_path, Some(line), m))?;
        let &doc = doc_ids
            .get(id.as_str())
            .ok_or_else(|| Error::load(&q_path, Some(line), format!("unknown document {id:?}")))?;
        if doc_labels[doc].is_empty() {
            return Err(Error::load(&q_path, Some(line), format!("query {id:?} has no labels")));
        }
        queries.push(doc);
    }
    if queries.len() != manifest.n_queries {
        return Err(Error::load(
            &q_path,
            None,
            format!("manifest announces {} queries, found {}", manifest.n_queries, queries.len()),
        ));
    }

    let dataset = Dataset {
        documents,
        candidates,
        a_dc,
        a_dd,
        label_names: manifest.label_names,
        doc_labels,
        candidate_labels,
        queries,
    };
    dataset
        .validate()
        .into_result()
        .map_err(|e| Error::load(dir, None, e.to_string()))?;
    Ok(dataset)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn write_labels(path: &Path, ids: &[&str], labels: &[BTreeSet<usize>], names: &[String]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    for (id, set) in ids.iter().zip(labels) {
        if set.is_empty() {
            continue;
        }
        let joined: Vec<&str> = set.iter().map(|&l| names[l].as_str()).collect();
        writeln!(w, "{}\t{}", escape_field(id), joined.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Writes `dataset` into `dir` (created if needed).
pub fn save_dataset(dataset: &Dataset, dir: &Path) -> Result<()> {
    dataset.validate().into_result()?;
    if let Some(bad) = dataset
        .label_names
        .iter()
        .find(|n| n.is_empty() || n.contains([',', '\t', '\n', '\r']))
    {
        return Err(Error::Parameter(format!(
            "label name {bad:?} cannot be stored (empty or contains a separator)"
        )));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let file = |name: &str| dir.join(name);

    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        n_documents: dataset.n_documents(),
        n_candidates: dataset.n_candidates(),
        n_queries: dataset.queries.len(),
        label_names: dataset.label_names.clone(),
    };
    let path = file(MANIFEST);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;

    let path = file(DOCUMENTS);
    let mut w = create(&path)?;
    for d in &dataset.documents {
        writeln!(w, "{}\t{}", escape_field(&d.id), escape_field(&d.text)).map_err(|e| Error::io(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = file(CANDIDATES);
    let mut w = create(&path)?;
    for c in &dataset.candidates {
        writeln!(w, "{}", escape_field(c)).map_err(|e| Error::io(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    write_matrix_market(&dataset.a_dc, &file(A_DC))?;
    write_matrix_market(&dataset.a_dd, &file(A_DD))?;

    let doc_ids: Vec<&str> = dataset.documents.iter().map(|d| d.id.as_str()).collect();
    let cand_ids: Vec<&str> = dataset.candidates.iter().map(String::as_str).collect();
    write_labels(&file(DOC_LABELS), &doc_ids, &dataset.doc_labels, &dataset.label_names)?;
    write_labels(
        &file(CANDIDATE_LABELS),
        &cand_ids,
        &dataset.candidate_labels,
        &dataset.label_names,
    )?;

    let path = file(QUERIES);
    let mut w = create(&path)?;
    for &q in &dataset.queries {
        writeln!(w, "{}", escape_field(doc_ids[q])).map_err(|e| Error::io(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::toy_dataset;

    #[test]
    fn escaping_roundtrip() {
        let s = "a\tb\nc\\d\re";
        let e = escape_field(s);
        assert!(!e.contains(['\t', '\n', '\r']));
        assert_eq!(unescape_field(&e).unwrap(), s);
        assert!(unescape_field("bad\\").is_err());
        assert!(unescape_field("bad\\x").is_err());
    }

    #[test]
    fn toy_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let mut ds = toy_dataset();
        ds.documents[1].text = "tabs\tand\nnewlines \\ too".into();
        save_dataset(&ds, dir.path()).unwrap();
        assert_eq!(load_dataset(dir.path()).unwrap(), ds);
    }

    #[test]
    fn empty_candidate_labels_survive() {
        let dir = tempfile::tempdir().unwrap();
        let ds = toy_dataset();
        assert!(ds.candidate_labels[0].is_empty());
        save_dataset(&ds, dir.path()).unwrap();
        let back = load_dataset(dir.path()).unwrap();
        assert!(back.candidate_labels[0].is_empty());
        assert_eq!(back.candidate_labels, ds.candidate_labels);
    }

    #[test]
    fn empty_directory_fails() {
        let dir = tempfile::tempdir().unwrap();
        let e = load_dataset(dir.path()).unwrap_err();
        assert!(e.to_string().contains(MANIFEST), "{e}");
    }

    #[test]
    fn unwritable_path_fails() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        assert!(save_dataset(&toy_dataset(), &blocker.join("sub")).is_err());
    }

    #[test]
    fn malformed_record_names_file_and_line() {
        let dir = tempfile::tempdir().unwrap();
        save_dataset(&toy_dataset(), dir.path()).unwrap();
        let q = dir.path().join(QUERIES);
        fs::write(&q, "D1\nD3\nD99\nD6\n").unwrap();
        let e = load_dataset(dir.path()).unwrap_err().to_string();
        assert!(e.contains("queries.tsv:3"), "{e}");

        save_dataset(&toy_dataset(), dir.path()).unwrap();
        fs::write(dir.path().join(DOCUMENTS), "D1 no tab here\n").unwrap();
        let e = load_dataset(dir.path()).unwrap_err().to_string();
        assert!(e.contains("documents.tsv:1"), "{e}");
    }

    #[test]
    fn matrix_shape_must_match_counts() {
        let dir = tempfile::tempdir().unwrap();
        save_dataset(&toy_dataset(), dir.path()).unwrap();
        fs::write(
            dir.path().join(A_DD),
            "%%MatrixMarket matrix coordinate integer general\n5 5 0\n",
        )
        .unwrap();
        let e = load_dataset(dir.path()).unwrap_err().to_string();
        assert!(e.contains("a_dd.mtx"), "{e}");
    }

    #[test]
    fn rejects_label_names_with_separators() {
        let dir = tempfile::tempdir().unwrap();
        let mut ds = toy_dataset();
        ds.label_names[0] = "a,b".into();
        assert!(save_dataset(&ds, dir.path()).is_err());
    }
}
