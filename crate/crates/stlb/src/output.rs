//! Rendering of reports. Everything is buffered and written in one go, so a
//! failed command never leaves a partial file behind.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use stlb_core::Complex64;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// One JSON object per line.
    Jsonl,
    /// A single pretty-printed JSON document.
    Json,
    Csv,
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// or to stdout when `path` is `None`.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> Result<(), CliError> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
        Some(p) => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(bytes)?;
            tmp.persist(p).map_err(|e| CliError::Io(e.error))?;
        }
    }
    Ok(())
}

pub fn json_lines<T: Serialize>(items: &[T]) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    for it in items {
        serde_json::to_writer(&mut buf, it).map_err(|e| CliError::Numeric(e.to_string()))?;
        buf.push(b'\n');
    }
    Ok(buf)
}

pub fn json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut buf = serde_json::to_vec_pretty(value).map_err(|e| CliError::Numeric(e.to_string()))?;
    buf.push(b'\n');
    Ok(buf)
}

/// CSV with a header row; `rows` are already formatted cells.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Numeric(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::Numeric(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Numeric(e.to_string()))
}

/// Shortest round-trip representation.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Flattens a complex value into `(re, im)` cells.
pub fn cplx(z: Complex64) -> [String; 2] {
    [num(z.re), num(z.im)]
}
