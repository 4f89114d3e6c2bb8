//! Matrix Market coordinate I/O for [`CsrMatrix`] and plain-text vectors.
//!
//! Values are written with Rust's shortest round-trip float formatting, so a
//! write/read cycle reproduces every entry bitwise.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Which half of the matrix is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    General,
    /// Lower triangle only, mirrored on read.
    Symmetric,
}

pub fn write_matrix<W: Write>(mut out: W, a: &CsrMatrix, symmetry: Symmetry) -> Result<()> {
    let entries: Vec<(usize, usize, f64)> = (0..a.nrows())
        .flat_map(|i| a.row(i).map(move |(j, v)| (i, j, v)))
        .filter(|&(i, j, _)| symmetry == Symmetry::General || i >= j)
        .collect();
    let kind = match symmetry {
        Symmetry::General => "general",
        Symmetry::Symmetric => "symmetric",
    };
    writeln!(out, "%%MatrixMarket matrix coordinate real {kind}")?;
    writeln!(out, "{} {} {}", a.nrows(), a.ncols(), entries.len())?;
    for (i, j, v) in entries {
        writeln!(out, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn read_matrix<R: BufRead>(input: R) -> Result<CsrMatrix> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let header = header?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, "missing %%MatrixMarket matrix header"));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported format {}", tokens[2])));
    }
    if tokens[3] != "real" && tokens[3] != "integer" {
        return Err(parse_err(1, format!("unsupported field {}", tokens[3])));
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(1, format!("unsupported symmetry {other}"))),
    };

    let mut dims: Option<(usize, usize, usize)> = None;
    let mut trip = Vec::new();
    for (ln, line) in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<usize>().map_err(|e| parse_err(ln + 1, e.to_string()));
        match dims {
            None => {
                if fields.len() != 3 {
                    return Err(parse_err(ln + 1, "expected 'rows cols nnz'"));
                }
                dims = Some((num(fields[0])?, num(fields[1])?, num(fields[2])?));
            }
            Some((nr, nc, _)) => {
                if fields.len() != 3 {
                    return Err(parse_err(ln + 1, "expected 'row col value'"));
                }
                let (i, j) = (num(fields[0])?, num(fields[1])?);
                if i == 0 || j == 0 || i > nr || j > nc {
                    return Err(parse_err(ln + 1, format!("index ({i}, {j}) out of range")));
                }
                let v: f64 = fields[2].parse().map_err(|_| parse_err(ln + 1, "bad value"))?;
                trip.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    trip.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (nr, nc, nnz) = dims.ok_or_else(|| parse_err(2, "missing size line"))?;
    let stored = if symmetric { trip.iter().filter(|t| t.0 >= t.1).count() } else { trip.len() };
    if stored != nnz {
        return Err(parse_err(0, format!("expected {nnz} entries, found {stored}")));
    }
    CsrMatrix::from_triplets(nr, nc, &trip)
}

/// One value per line.
pub fn write_vector<W: Write>(mut out: W, v: &[f64]) -> Result<()> {
    for x in v {
        writeln!(out, "{x:e}")?;
    }
    Ok(())
}

pub fn read_vector<R: BufRead>(input: R) -> Result<Vec<f64>> {
    let mut v = Vec::new();
    for (ln, line) in input.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') || t.starts_with('#') {
            continue;
        }
        v.push(t.parse().map_err(|_| parse_err(ln + 1, format!("bad value '{t}'")))?);
    }
    Ok(v)
}
