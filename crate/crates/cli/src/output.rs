//! CSV tables and the JSON run summary written next to them.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// One CSV cell. Floats are written with 17 significant digits so that a
/// value survives a round trip through the file.
#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(&'static str),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&'static str> for Cell {
    fn from(x: &'static str) -> Self {
        Cell::Text(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Int(x as i64)
    }
}

fn render(cell: &Cell, out: &mut String) {
    match cell {
        Cell::Int(i) => write!(out, "{i}"),
        Cell::Float(x) => write!(out, "{x:.16e}"),
        Cell::Text(s) => write!(out, "{s}"),
    }
    .expect("writing to a String cannot fail");
}

/// A table with a fixed header. Rows are kept in insertion order, which the
/// commands make canonical.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: &'static str,
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&'static str]) -> Self {
        Self {
            name,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                render(cell, &mut out);
            }
            out.push('\n');
        }
        out
    }
}

/// Run parameters recorded next to the tables.
#[derive(Debug, Serialize)]
pub struct Summary {
    pub command: String,
    /// `sha256:` of the canonical boundary config, framed as a git blob.
    pub config_hash: String,
    pub config: String,
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
    pub grid: usize,
    pub files: Vec<String>,
    pub results: serde_json::Value,
}

/// Content hash in the style of a git object id: the digest of
/// `blob <len>\0<content>`.
pub fn content_hash(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!("blob {}\0", text.len()).as_bytes());
    hasher.update(text.as_bytes());
    format!("sha256:{}", hex::encode(hasher.finalize()))
}

/// Writes every table as `<name>.csv` and the summary as `<command>.json`.
pub fn write_run(dir: &Path, tables: &[Table], mut summary: Summary) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for table in tables {
        let path = dir.join(format!("{}.csv", table.name));
        fs::write(&path, table.to_csv())?;
        summary.files.push(format!("{}.csv", table.name));
        written.push(path);
    }
    let path = dir.join(format!("{}.json", summary.command));
    let mut json = serde_json::to_string_pretty(&summary).map_err(io::Error::other)?;
    json.push('\n');
    fs::write(&path, json)?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        let mut t = Table::new("x", &["a", "b"]);
        let v = 0.1 + 0.2;
        t.push(vec![Cell::from(3usize), Cell::from(v)]);
        let csv = t.to_csv();
        let field = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap();
        assert_eq!(field.parse::<f64>().unwrap(), v);
        assert_eq!(csv.lines().next().unwrap(), "a,b");
    }

    #[test]
    fn hash_matches_git_framing() {
        // `printf 'hello\n' | git hash-object --object-format=sha256 --stdin`
        assert_eq!(
            content_hash("hello\n"),
            "sha256:2cf8d83d9ee29543b34a87727421fdecb7e3f3a183d337639025de576db9ebb4"
        );
    }
}
