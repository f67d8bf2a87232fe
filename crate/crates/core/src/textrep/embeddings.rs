//! Externally trained vectors in the word2vec text layout:
//! a `<n> <dim>` header, then `<entity_id> <float> ... <float>` per line.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Representation, RepresentationKind};
use crate::error::{Error, Result};

const MAX_LISTED_MISSING: usize = 10;

pub fn load_embeddings<S: AsRef<str>>(path: &Path, entity_ids: &[S]) -> Result<Representation> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(BufReader::new(file), path, entity_ids)
}

/// Parses an embedding file and returns rows aligned to `entity_ids`.
/// Ids present in the file but not requested are ignored.
pub fn parse_embeddings<R: BufRead, S: AsRef<str>>(
    reader: R,
    path: &Path,
    entity_ids: &[S],
) -> Result<Representation> {
    let mut lines = reader.lines().enumerate();
    let header = loop {
        match lines.next() {
            None => return Err(Error::load(path, Some(1), "missing '<n> <dim>' header")),
            Some((i, line)) => {
                let line = line.map_err(|e| Error::io(path, e))?;
                if !line.trim().is_empty() {
                    break (i + 1, line);
                }
            }
        }
    };
    let parts: Vec<&str> = header.1.split_whitespace().collect();
    let (n, dim) = match parts.as_slice() {
        [n, d] => match (n.parse::<usize>(), d.parse::<usize>()) {
            (Ok(n), Ok(d)) => (n, d),
            _ => return Err(Error::load(path, Some(header.0), format!("bad header {:?}", header.1))),
        },
        _ => return Err(Error::load(path, Some(header.0), format!("bad header {:?}", header.1))),
    };

    let wanted: HashMap<&str, usize> = entity_ids.iter().enumerate().map(|(i, s)| (s.as_ref(), i)).collect();
    let mut data = vec![0.0; entity_ids.len() * dim];
    let mut found = vec![false; entity_ids.len()];
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut rows = 0usize;
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let mut fields = line.split_whitespace();
        let Some(id) = fields.next() else { continue };
        rows += 1;
        if let Some(first) = seen.insert(id.to_string(), lineno) {
            return Err(Error::load(
                path,
                Some(lineno),
                format!("entity {id:?} already defined on line {first}"),
            ));
        }
        let values: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::load(path, Some(lineno), format!("bad value {f:?}")))
            })
            .collect::<Result<_>>()?;
        if values.len() != dim {
            return Err(Error::load(
                path,
                Some(lineno),
                format!("entity {id:?} has {} values, header says {dim}", values.len()),
            ));
        }
        if let Some(&slot) = wanted.get(id) {
            data[slot * dim..(slot + 1) * dim].copy_from_slice(&values);
            found[slot] = true;
        }
    }
    if rows != n {
        return Err(Error::load(path, None, format!("header announces {n} rows, file has {rows}")));
    }
    let missing: Vec<&str> = entity_ids
        .iter()
        .zip(&found)
        .filter(|(_, f)| !**f)
        .map(|(id, _)| id.as_ref())
        .collect();
    if !missing.is_empty() {
        let shown: Vec<&str> = missing.iter().take(MAX_LISTED_MISSING).copied().collect();
        return Err(Error::MissingEntities {
            count: missing.len(),
            shown: shown.join(", "),
        });
    }
    Representation::dense(RepresentationKind::External, entity_ids.len(), dim, data)
}

/// Writes a representation in the same text layout.
pub fn write_embeddings<S: AsRef<str>>(rep: &Representation, entity_ids: &[S], path: &Path) -> Result<()> {
    if entity_ids.len() != rep.n_entities() {
        return Err(Error::Dimension {
            context: "embedding ids".into(),
            expected: rep.n_entities(),
            found: entity_ids.len(),
        });
    }
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "{} {}", rep.n_entities(), rep.dim()).map_err(io)?;
    for (i, id) in entity_ids.iter().enumerate() {
        write!(w, "{}", id.as_ref()).map_err(io)?;
        for v in rep.row_dense(i) {
            write!(w, " {v:?}").map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, ids: &[&str]) -> Result<Representation> {
        parse_embeddings(text.as_bytes(), Path::new("emb.txt"), ids)
    }

    #[test]
    fn aligned_to_requested_order() {
        let text = "2 3\nd1 1 0 0\nd2 0 1 0\n";
        let r = parse(text, &["d1", "d2"]).unwrap();
        assert_eq!((r.n_entities(), r.dim()), (2, 3));
        assert_eq!(r.kind(), RepresentationKind::External);
        assert_eq!(r.row_dense(0), vec![1.0, 0.0, 0.0]);
        let r = parse(text, &["d2", "d1"]).unwrap();
        assert_eq!(r.row_dense(0), vec![0.0, 1.0, 0.0]);
        assert_eq!(r.row_dense(1), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn missing_entity() {
        let e = parse("1 2\nd1 1 2\n", &["d1", "d2"]).unwrap_err();
        assert!(matches!(e, Error::MissingEntities { count: 1, ref shown } if shown == "d2"));
    }

    #[test]
    fn missing_list_is_capped() {
        let ids: Vec<String> = (0..25).map(|i| format!("x{i}")).collect();
        let ids: Vec<&str> = ids.iter().map(String::as_str).collect();
        match parse("0 2\n", &ids).unwrap_err() {
            Error::MissingEntities { count, shown } => {
                assert_eq!(count, 25);
                assert_eq!(shown.split(", ").count(), 10);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn inconsistent_dimension() {
        let e = parse("2 3\nd1 1 0 0\nd2 0 1\n", &["d1"]).unwrap_err();
        assert!(e.to_string().contains("emb.txt:3"), "{e}");
        assert!(parse("2 3\nd1 1 0 0\n", &["d1"]).is_err());
        assert!(parse("", &["d1"]).is_err());
        assert!(parse("1 1\nd1 nan\n", &["d1"]).is_err());
        assert!(parse("2 1\nd1 1\nd1 2\n", &["d1"]).is_err());
    }

    #[test]
    fn write_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.txt");
        let r = Representation::from_rows(RepresentationKind::Lsa, &[vec![0.1, -2.5], vec![3.0, 1e-9]]).unwrap();
        write_embeddings(&r, &["a", "b"], &path).unwrap();
        let back = load_embeddings(&path, &["a", "b"]).unwrap();
        assert_eq!(back.row_dense(0), r.row_dense(0));
        assert_eq!(back.row_dense(1), r.row_dense(1));
    }
}
