//! Dense Matrix Market files (`matrix array complex general`).
//!
//! Entries are written column-major with 17 significant digits, which is
//! enough for every `f64` to read back bit-exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::linalg::{CMatrix, CVector, C64};

#[derive(Debug, Error)]
pub enum MtxError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn parse_err(line: usize, message: impl Into<String>) -> MtxError {
    MtxError::Parse {
        line,
        message: message.into(),
    }
}

pub fn format_matrix(m: &CMatrix) -> String {
    let mut out = String::with_capacity(48 * m.rows() * m.cols() + 64);
    out.push_str("%%MatrixMarket matrix array complex general\n");
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for z in m.as_col_major() {
        let _ = writeln!(out, "{:.16e} {:.16e}", z.re, z.im);
    }
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Field {
    Real,
    Complex,
}

pub fn parse_matrix(text: &str) -> Result<CMatrix, MtxError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, "expected a %%MatrixMarket matrix header"));
    }
    if tokens[2] != "array" {
        return Err(parse_err(1, format!("unsupported format `{}`", tokens[2])));
    }
    let field = match tokens[3].as_str() {
        "complex" => Field::Complex,
        "real" | "double" => Field::Real,
        other => return Err(parse_err(1, format!("unsupported field `{other}`"))),
    };
    if tokens[4] != "general" {
        return Err(parse_err(
            1,
            format!("unsupported symmetry `{}`", tokens[4]),
        ));
    }

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body
        .next()
        .ok_or_else(|| parse_err(2, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| parse_err(size_line, format!("bad size line: {e}")))?;
    let [rows, cols] = dims[..] else {
        return Err(parse_err(size_line, "size line must hold rows and columns"));
    };

    let expected = rows * cols;
    let mut data = Vec::with_capacity(expected);
    for (line, l) in body {
        if data.len() == expected {
            return Err(parse_err(line, "more entries than the declared size"));
        }
        let parts: Vec<&str> = l.split_whitespace().collect();
        let want = if field == Field::Complex { 2 } else { 1 };
        if parts.len() != want {
            return Err(parse_err(line, format!("expected {want} number(s)")));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| parse_err(line, format!("bad number `{s}`: {e}")))
        };
        let re = num(parts[0])?;
        let im = if want == 2 { num(parts[1])? } else { 0.0 };
        data.push(C64::new(re, im));
    }
    if data.len() != expected {
        return Err(parse_err(
            text.lines().count(),
            format!("found {} entries, expected {expected}", data.len()),
        ));
    }
    CMatrix::from_col_major(rows, cols, data).map_err(|e| parse_err(size_line, e.to_string()))
}

pub fn write_matrix(path: &Path, m: &CMatrix) -> Result<(), MtxError> {
    fs::write(path, format_matrix(m)).map_err(|source| MtxError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes a vector as an `n x 1` array.
pub fn write_vector(path: &Path, v: &CVector) -> Result<(), MtxError> {
    let m = CMatrix::from_columns(std::slice::from_ref(v)).expect("single column");
    write_matrix(path, &m)
}

pub fn read_matrix(path: &Path) -> Result<CMatrix, MtxError> {
    let text = fs::read_to_string(path).map_err(|source| MtxError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_matrix(&text)
}

/// Reads an `n x 1` array as a vector.
pub fn read_vector(path: &Path) -> Result<CVector, MtxError> {
    let m = read_matrix(path)?;
    if m.cols() != 1 {
        return Err(parse_err(
            2,
            format!("expected one column, found {}", m.cols()),
        ));
    }
    Ok(m.column(0))
}
