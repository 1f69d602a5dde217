//! Plain-text operator files.
//!
//! The first line holds the dimension `d`, followed by `d` rows of `d`
//! whitespace-separated complex entries written as `a+bi`, `a-bi`, `a` or
//! `bi`. Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use quench_core::operator::C64;
use quench_core::{HermitianOperator, Matrix};

use crate::error::{CliError, Result};

fn err(path: &Path, line: usize, msg: impl Into<String>) -> CliError {
    CliError::OperatorFile { path: path.to_path_buf(), line, msg: msg.into() }
}

/// Parses one complex entry.
pub fn parse_complex(s: &str) -> Option<C64> {
    let Some(body) = s.strip_suffix('i') else {
        return s.parse().ok().map(|re| C64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |t: &str| match t {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => t.parse().ok(),
    };
    match split {
        Some(k) => Some(C64::new(body[..k].parse().ok()?, imag(&body[k..])?)),
        None => Some(C64::new(0.0, imag(body)?)),
    }
}

/// Round-trip formatting: shortest representation that parses back to the
/// same bits.
pub fn format_complex(z: C64) -> String {
    format!("{:e}{:+e}i", z.re, z.im)
}

pub fn parse_operator(text: &str, path: &Path) -> Result<HermitianOperator> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (first, header) = lines.next().ok_or_else(|| err(path, 1, "empty operator file"))?;
    let d: usize = header
        .parse()
        .map_err(|_| err(path, first, format!("expected the dimension, found {header:?}")))?;
    if d == 0 {
        return Err(err(path, first, "dimension must be positive"));
    }
    let mut m = Matrix::zeros(d, d);
    let mut last = first;
    for row in 0..d {
        let (line, text) = lines.next().ok_or_else(|| err(path, last + 1, format!("expected {d} rows, found {row}")))?;
        last = line;
        let entries: Vec<&str> = text.split_whitespace().collect();
        if entries.len() != d {
            return Err(err(path, line, format!("row has {} entries, expected {d}", entries.len())));
        }
        for (col, e) in entries.iter().enumerate() {
            m[(row, col)] = parse_complex(e).ok_or_else(|| err(path, line, format!("cannot parse {e:?} as a complex number")))?;
        }
    }
    if let Some((line, _)) = lines.next() {
        return Err(err(path, line, format!("unexpected content after {d} rows")));
    }
    HermitianOperator::new(m).map_err(|e| err(path, first, e.to_string()))
}

pub fn format_operator(h: &HermitianOperator) -> String {
    let d = h.dim();
    let mut out = format!("{d}\n");
    for i in 0..d {
        let row: Vec<String> = (0..d).map(|j| format_complex(h.matrix()[(i, j)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn load_operator_file(path: &Path) -> Result<HermitianOperator> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_operator(&text, path)
}

pub fn save_operator_file(path: &Path, h: &HermitianOperator) -> Result<()> {
    std::fs::write(path, format_operator(h)).map_err(|e| CliError::io(path, e))
}
