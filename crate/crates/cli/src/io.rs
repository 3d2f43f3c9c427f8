//! CSV output: header row, LF line endings, values rounded to a fixed
//! number of significant digits, written through a temporary file and
//! renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use lumpcyl::verify::format_sig;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self, precision: usize) -> String {
        match self {
            Cell::Num(x) => format_sig(*x, precision),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Renders a table to CSV bytes.
pub fn render_csv(
    header: &[&str],
    rows: &[Vec<Cell>],
    precision: usize,
) -> std::io::Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|c| c.render(precision)))?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

/// Writes `bytes` to `path` atomically (temporary file in the same
/// directory, then rename).
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: &[Vec<Cell>],
    precision: usize,
) -> std::io::Result<()> {
    write_atomic(path, &render_csv(header, rows, precision)?)
}
