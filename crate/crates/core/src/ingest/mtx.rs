//! MatrixMarket coordinate files for the adjacency matrices.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::corpus::SparseMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Integer,
    Real,
    Pattern,
}

/// Reads a `coordinate` MatrixMarket file (`integer`, `real` or `pattern`
/// field; `general` or `symmetric` layout).
pub fn read_matrix_market(path: &Path) -> Result<SparseMatrix> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_matrix_market_from(BufReader::new(file), path)
}

pub(crate) fn read_matrix_market_from<R: BufRead>(reader: R, path: &Path) -> Result<SparseMatrix> {
    let err = |line: usize, msg: String| Error::load(path, Some(line), msg);
    let mut lines = reader.lines().enumerate();

    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let header = header.map_err(|e| Error::io(path, e))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(err(1, format!("not a MatrixMarket matrix header: {header:?}")));
    }
    if tokens[2] != "coordinate" {
        return Err(err(1, format!("unsupported format {:?}, expected coordinate", tokens[2])));
    }
    let field = match tokens[3].as_str() {
        "integer" => Field::Integer,
        "real" | "double" => Field::Real,
        "pattern" => Field::Pattern,
        other => return Err(err(1, format!("unsupported field {other:?}"))),
    };
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(err(1, format!("unsupported symmetry {other:?}"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        match size {
            None => {
                if parts.len() != 3 {
                    return Err(err(lineno, format!("expected size line 'rows cols nnz', got {line:?}")));
                }
                let parse = |s: &str| s.parse::<usize>().map_err(|e| err(lineno, format!("bad size {s:?}: {e}")));
                let dims = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
                triplets.reserve(if symmetric { 2 * dims.2 } else { dims.2 });
                size = Some(dims);
            }
            Some((rows, cols, _)) => {
                let want = if field == Field::Pattern { 2 } else { 3 };
                if parts.len() != want {
                    return Err(err(lineno, format!("expected {want} columns, got {}", parts.len())));
                }
                let index = |s: &str, bound: usize| -> Result<usize> {
                    let i: usize = s.parse().map_err(|e| err(lineno, format!("bad index {s:?}: {e}")))?;
                    if i == 0 || i > bound {
                        return Err(err(lineno, format!("index {i} outside 1..={bound}")));
                    }
                    Ok(i - 1)
                };
                let r = index(parts[0], rows)?;
                let c = index(parts[1], cols)?;
                let v = match field {
                    Field::Pattern => 1.0,
                    Field::Integer => parts[2]
                        .parse::<i64>()
                        .map_err(|e| err(lineno, format!("bad integer value {:?}: {e}", parts[2])))?
                        as f64,
                    Field::Real => parts[2]
                        .parse::<f64>()
                        .map_err(|e| err(lineno, format!("bad real value {:?}: {e}", parts[2])))?,
                };
                if !(v.is_finite() && v >= 0.0) {
                    return Err(err(lineno, format!("value {v} must be finite and nonnegative")));
                }
                triplets.push((r, c, v));
                if symmetric && r != c {
                    triplets.push((c, r, v));
                }
            }
        }
    }
    let (rows, cols, nnz) = size.ok_or_else(|| err(1, "missing size line".into()))?;
    let stored = if symmetric {
        triplets.iter().filter(|(r, c, _)| r >= c).count()
    } else {
        triplets.len()
    };
    if stored != nnz {
        return Err(Error::load(
            path,
            None,
            format!("size line announces {nnz} entries but {stored} were read"),
        ));
    }
    SparseMatrix::from_triplets(rows, cols, triplets).map_err(|e| Error::load(path, None, e.to_string()))
}

/// Writes a `coordinate general` file; the field is `integer` when every
/// value is integral and `real` otherwise.
pub fn write_matrix_market(m: &SparseMatrix, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_matrix_market_to(m, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn write_matrix_market_to<W: Write>(m: &SparseMatrix, w: &mut W) -> std::io::Result<()> {
    let integral = m.values().iter().all(|v| v.fract() == 0.0 && *v < 9.0e15);
    let field = if integral { "integer" } else { "real" };
    writeln!(w, "%%MatrixMarket matrix coordinate {field} general")?;
    writeln!(w, "{} {} {}", m.n_rows(), m.n_cols(), m.nnz())?;
    for (r, c, v) in m.triplets() {
        if integral {
            writeln!(w, "{} {} {}", r + 1, c + 1, v as i64)?;
        } else {
            writeln!(w, "{} {} {:?}", r + 1, c + 1, v)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<SparseMatrix> {
        read_matrix_market_from(text.as_bytes(), Path::new("test.mtx"))
    }

    #[test]
    fn reads_integer_general() {
        let m = parse("%%MatrixMarket matrix coordinate integer general\n% comment\n2 3 2\n1 3 4\n2 1 1\n").unwrap();
        assert_eq!(m.to_dense(), vec![vec![0.0, 0.0, 4.0], vec![1.0, 0.0, 0.0]]);
    }

    #[test]
    fn expands_symmetric_pattern() {
        let m = parse("%%MatrixMarket matrix coordinate pattern symmetric\n2 2 2\n1 1\n2 1\n").unwrap();
        assert_eq!(m.to_dense(), vec![vec![1.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse("%%MatrixMarket matrix coordinate integer general\n2 2 1\n3 1 1\n").unwrap_err();
        assert!(e.to_string().contains("test.mtx:3"), "{e}");
        let e = parse("%%MatrixMarket matrix coordinate integer general\n2 2 2\n1 1 1\n").unwrap_err();
        assert!(e.to_string().contains("announces 2"), "{e}");
        assert!(parse("").is_err());
        assert!(parse("%%MatrixMarket matrix array real general\n1 1\n1\n").is_err());
        assert!(parse("%%MatrixMarket matrix coordinate integer general\n1 1 1\n1 1 -2\n").is_err());
    }

    #[test]
    fn write_then_read() {
        let m = SparseMatrix::from_triplets(3, 2, vec![(0, 1, 2.0), (2, 0, 7.0)]).unwrap();
        let mut buf = Vec::new();
        write_matrix_market_to(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate integer general\n3 2 2\n"));
        assert_eq!(parse(&text).unwrap(), m);

        let r = SparseMatrix::from_triplets(1, 1, vec![(0, 0, 0.25)]).unwrap();
        let mut buf = Vec::new();
        write_matrix_market_to(&r, &mut buf).unwrap();
        assert_eq!(parse(std::str::from_utf8(&buf).unwrap()).unwrap(), r);
    }
}
