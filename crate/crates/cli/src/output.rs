//! Deterministic CSV and JSON artifacts with a metadata header.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::{RunError, OUT_DIR_ENV};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

pub fn resolve_path(out: Option<&Path>, command: &str, format: Format) -> PathBuf {
    let name = format!("{command}.{}", format.extension());
    match out {
        Some(p) => p.to_path_buf(),
        None => match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(name),
            _ => PathBuf::from(name),
        },
    }
}

/// Shortest round-trip text, in exponent form outside `[1e-4, 1e15)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// A table plus its JSON rendering and metadata.
#[derive(Debug, Clone)]
pub struct Artifact {
    meta: BTreeMap<String, String>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
    data: Value,
}

impl Artifact {
    pub fn new(command: &str, seed: Option<u64>) -> Self {
        let mut meta = BTreeMap::new();
        meta.insert("tool".into(), "rpw".into());
        meta.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        meta.insert("command".into(), command.into());
        if let Some(s) = seed {
            meta.insert("seed".into(), s.to_string());
        }
        Artifact {
            meta,
            columns: Vec::new(),
            rows: Vec::new(),
            data: Value::Null,
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.into(), value.to_string());
        self
    }

    pub fn columns(mut self, columns: &[&str]) -> Self {
        self.columns = columns.iter().map(|c| c.to_string()).collect();
        self
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn data(mut self, data: Value) -> Self {
        self.data = data;
        self
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, RunError> {
        match format {
            Format::Csv => {
                let mut buf = Vec::new();
                for (k, v) in &self.meta {
                    writeln!(buf, "# {k}={v}")?;
                }
                let mut w = csv::Writer::from_writer(buf);
                let csv_err = |e: csv::Error| RunError::Runtime(e.to_string());
                w.write_record(&self.columns).map_err(csv_err)?;
                for r in &self.rows {
                    w.write_record(r).map_err(csv_err)?;
                }
                w.into_inner().map_err(|e| RunError::Runtime(e.to_string()))
            }
            Format::Json => {
                let doc = json!({ "meta": self.meta, "data": self.data });
                let mut text =
                    serde_json::to_vec_pretty(&doc).map_err(|e| RunError::Runtime(e.to_string()))?;
                text.push(b'\n');
                Ok(text)
            }
        }
    }

    pub fn write(&self, path: &Path, format: Format) -> Result<(), RunError> {
        let bytes = self.render(format)?;
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)?;
            }
        }
        fs::write(path, bytes)?;
        Ok(())
    }
}
