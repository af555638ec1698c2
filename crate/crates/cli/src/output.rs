//! Deterministic CSV emission: 17 significant digits, '\n' line endings,
//! a '#' header block carrying the resolved rates and spectrum, and
//! atomic temp-then-rename writes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Fixed scientific format: 16 fractional digits = 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Default)]
pub struct Csv {
    header: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            header: Vec::new(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: f64) {
        self.header.push((key.to_string(), num(value)));
    }

    pub fn meta_text(&mut self, key: &str, value: &str) {
        self.header.push((key.to_string(), value.to_string()));
    }

    pub fn row(&mut self, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(values);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(out, "# {k} = {v}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|&x| num(x)).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    /// Atomic write: temp file in the target directory, then rename.
    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf, String> {
        std::fs::create_dir_all(dir)
            .map_err(|e| format!("cannot create output directory {}: {e}", dir.display()))?;
        let path = dir.join(name);
        let tmp = dir.join(format!(".{name}.tmp"));
        std::fs::write(&tmp, self.render())
            .map_err(|e| format!("cannot write {}: {e}", tmp.display()))?;
        std::fs::rename(&tmp, &path)
            .map_err(|e| format!("cannot finalize {}: {e}", path.display()))?;
        Ok(path)
    }
}
