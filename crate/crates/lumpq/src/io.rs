//! File formats: Matrix Market array files for transition matrices and a
//! two-column CSV for partitions.
//!
//! Matrices use `%%MatrixMarket matrix array real general`, column-major,
//! 17 significant digits (round-trips f64 exactly). Partitions use a CSV
//! with header `state,aggregate`, one row per state, 0-indexed.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::markov::{Partition, TransitionMatrix};

const MM_HEADER: &str = "%%MatrixMarket matrix array real general";

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::ParseError { line, msg: msg.into() }
}

/// Renders a matrix in Matrix Market array format. Extra comment lines are
/// embedded after the header, each prefixed with `%`.
pub fn matrix_to_string_with_comments(p: &TransitionMatrix, comments: &[String]) -> String {
    let n = p.n();
    let mut out = String::new();
    out.push_str(MM_HEADER);
    out.push('\n');
    for c in comments {
        out.push_str("% ");
        out.push_str(c);
        out.push('\n');
    }
    out.push_str(&format!("{n} {n}\n"));
    for j in 0..n {
        for i in 0..n {
            out.push_str(&format!("{:.16e}\n", p.entries()[(i, j)]));
        }
    }
    out
}

pub fn matrix_to_string(p: &TransitionMatrix) -> String {
    matrix_to_string_with_comments(p, &[])
}

/// Parses a Matrix Market array file into a validated transition matrix.
pub fn parse_matrix_str(text: &str) -> Result<TransitionMatrix> {
    let mut lines = text.lines().enumerate();
    let (lineno, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty input"))?;
    let mut fields = header.split_whitespace();
    let banner = fields.next().unwrap_or("");
    if banner != "%%MatrixMarket" {
        return Err(parse_err(lineno + 1, "missing %%MatrixMarket banner"));
    }
    let rest: Vec<String> = fields.map(|f| f.to_ascii_lowercase()).collect();
    if rest != ["matrix", "array", "real", "general"] {
        return Err(parse_err(
            lineno + 1,
            format!("unsupported header: expected `{MM_HEADER}`"),
        ));
    }

    // Skip comments and blank lines, then read dimensions.
    let mut dims: Option<(usize, usize, usize)> = None;
    let mut values: Vec<f64> = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('%') {
            if dims.is_none() {
                continue;
            }
            return Err(parse_err(lineno, "comment inside data section"));
        }
        match dims {
            None => {
                let toks: Vec<&str> = trimmed.split_whitespace().collect();
                if toks.len() != 2 {
                    return Err(parse_err(lineno, "expected `rows cols`"));
                }
                let rows: usize = toks[0]
                    .parse()
                    .map_err(|_| parse_err(lineno, "bad row count"))?;
                let cols: usize = toks[1]
                    .parse()
                    .map_err(|_| parse_err(lineno, "bad column count"))?;
                if rows != cols {
                    return Err(parse_err(lineno, format!("non-square dimensions {rows}x{cols}")));
                }
                if rows == 0 {
                    return Err(parse_err(lineno, "zero-sized matrix"));
                }
                rows.checked_mul(cols)
                    .ok_or_else(|| parse_err(lineno, "dimension overflow"))?;
                values.reserve(rows * cols);
                dims = Some((rows, cols, lineno));
            }
            Some((rows, cols, _)) => {
                for tok in trimmed.split_whitespace() {
                    if values.len() == rows * cols {
                        return Err(parse_err(lineno, "more values than rows*cols"));
                    }
                    let x: f64 = tok
                        .parse()
                        .map_err(|_| parse_err(lineno, format!("bad value `{tok}`")))?;
                    values.push(x);
                }
            }
        }
    }
    let (n, _, dim_line) = dims.ok_or_else(|| parse_err(1, "missing dimension line"))?;
    if values.len() != n * n {
        return Err(parse_err(
            dim_line,
            format!("expected {} values, found {}", n * n, values.len()),
        ));
    }
    // Column-major on disk.
    let mut raw = Array2::<f64>::zeros((n, n));
    for (t, x) in values.into_iter().enumerate() {
        raw[(t % n, t / n)] = x;
    }
    TransitionMatrix::new(raw)
}

pub fn write_matrix(p: &TransitionMatrix, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, matrix_to_string(p))?;
    Ok(())
}

pub fn write_matrix_with_comments(
    p: &TransitionMatrix,
    path: impl AsRef<Path>,
    comments: &[String],
) -> Result<()> {
    fs::write(path, matrix_to_string_with_comments(p, comments))?;
    Ok(())
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<TransitionMatrix> {
    parse_matrix_str(&fs::read_to_string(path)?)
}

pub fn partition_to_string(pi: &Partition) -> String {
    let mut out = String::from("state,aggregate\n");
    for (i, l) in pi.labels().iter().enumerate() {
        out.push_str(&format!("{i},{l}\n"));
    }
    out
}

/// Parses a partition CSV. Every state in `0..n` must appear exactly once;
/// aggregate ids must form a dense, non-empty partition.
pub fn parse_partition_str(text: &str) -> Result<Partition> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    if header.trim() != "state,aggregate" {
        return Err(parse_err(1, "expected header `state,aggregate`"));
    }
    let mut rows: Vec<(usize, usize, usize)> = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut it = trimmed.split(',');
        let state: usize = it
            .next()
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| parse_err(lineno, "bad state index"))?;
        let agg: usize = it
            .next()
            .ok_or_else(|| parse_err(lineno, "missing aggregate id"))?
            .trim()
            .parse()
            .map_err(|_| parse_err(lineno, "bad aggregate id"))?;
        if it.next().is_some() {
            return Err(parse_err(lineno, "trailing fields"));
        }
        rows.push((state, agg, lineno));
    }
    if rows.is_empty() {
        return Err(parse_err(1, "no rows"));
    }
    let n = rows.len();
    let mut labels = vec![usize::MAX; n];
    for (state, agg, lineno) in rows {
        if state >= n {
            return Err(parse_err(lineno, format!("state {state} out of range for {n} rows")));
        }
        if labels[state] != usize::MAX {
            return Err(parse_err(lineno, format!("duplicate state {state}")));
        }
        labels[state] = agg;
    }
    Partition::from_labels(labels)
}

pub fn write_partition(pi: &Partition, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, partition_to_string(pi))?;
    Ok(())
}

pub fn read_partition(path: impl AsRef<Path>) -> Result<Partition> {
    parse_partition_str(&fs::read_to_string(path)?)
}
