use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::error::Result;

pub const TOOL_VERSION: &str = concat!("pathlab ", env!("CARGO_PKG_VERSION"));

/// Provenance lines written as `#` comments at the top of every file.
#[derive(Debug, Clone)]
pub struct Header {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub discretization: Vec<(String, String)>,
}

impl Header {
    pub fn render(&self) -> String {
        let mut s = format!(
            "# tool: {TOOL_VERSION}\n# command: {}\n# config_sha256: {}\n# seed: {}\n",
            self.command, self.config_hash, self.seed
        );
        for (k, v) in &self.discretization {
            s.push_str(&format!("# {k}: {v}\n"));
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let disc: serde_json::Map<String, serde_json::Value> = self
            .discretization
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect();
        serde_json::json!({
            "tool": TOOL_VERSION,
            "command": self.command,
            "config_sha256": self.config_hash,
            "seed": self.seed,
            "discretization": disc,
        })
    }
}

/// Shortest round-trip decimal form, in exponent notation for very large or
/// very small magnitudes; empty for NaN.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v.is_nan() {
        String::new()
    } else if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[derive(Debug, Clone)]
pub struct CsvTable {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self, header: &Header) -> String {
        let mut s = header.render();
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// Files produced by one command, held in memory until [`OutputSet::commit`].
#[derive(Debug, Clone, Default)]
pub struct OutputSet {
    files: BTreeMap<String, Vec<u8>>,
}

impl OutputSet {
    pub fn add(&mut self, name: &str, contents: String) {
        self.files.insert(name.to_string(), contents.into_bytes());
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.get(name).map(Vec::as_slice)
    }

    /// Writes every file to a temporary sibling first and renames them into
    /// place only once all writes succeeded.
    pub fn commit(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut staged = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let mut tmp = NamedTempFile::new_in(dir)?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            staged.push((tmp, dir.join(name)));
        }
        let mut written = Vec::with_capacity(staged.len());
        for (tmp, target) in staged {
            tmp.persist(&target).map_err(|e| e.error)?;
            written.push(target);
        }
        Ok(written)
    }
}

/// A gnuplot script that plots columns of a CSV written alongside it.
pub fn gnuplot_script(header: &Header, data_file: &str, title: &str, x_col: usize, series: &[(usize, &str)]) -> String {
    let mut s = header.render();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str(&format!("set title '{title}'\n"));
    let plots: Vec<String> = series
        .iter()
        .map(|(col, label)| format!("'{data_file}' using {x_col}:{col} with linespoints title '{label}'"))
        .collect();
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    s
}
