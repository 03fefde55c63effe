use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use serde::Serialize;
use serde_json::{json, Map, Value};

use mtail::numfmt::sig17;
use mtail::Result;

use super::args::{Format, OutputArgs};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => sig17(*v + 0.0),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(_) => Value::Null,
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// A result table plus a free-form summary carried by JSON output.
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Value,
}

impl Report {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            summary: Value::Null,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::csv))?;
        }
        let bytes = w.into_inner().map_err(|e| mtail::Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| mtail::Error::Io(e.to_string()))
    }

    fn json(&self, manifest: &Value) -> Result<String> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                for (c, v) in self.columns.iter().zip(r) {
                    m.insert((*c).to_string(), v.json());
                }
                Value::Object(m)
            })
            .collect();
        let doc = json!({
            "manifest": manifest,
            "columns": self.columns,
            "rows": rows,
            "summary": self.summary,
        });
        let mut s = serde_json::to_string_pretty(&doc)?;
        s.push('\n');
        Ok(s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub seed: u64,
    pub toolkit_version: String,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<PathBuf>,
}

fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, Value>) {
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        _ => {
            out.insert(prefix.to_string(), v.clone());
        }
    }
}

pub fn now() -> String {
    humantime::format_rfc3339_millis(SystemTime::now()).to_string()
}

impl RunManifest {
    pub fn new<A: Serialize>(command: &str, args: &A, seed: u64, started_at: String) -> Result<Self> {
        let mut parameters = BTreeMap::new();
        flatten("", &serde_json::to_value(args)?, &mut parameters);
        Ok(Self {
            command: command.to_string(),
            parameters,
            seed,
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at,
            finished_at: String::new(),
            outputs: Vec::new(),
        })
    }

    /// The manifest embedded in output files: no timestamps, and nothing
    /// that cannot change the results.
    fn inline(&self) -> Value {
        let params: BTreeMap<_, _> = self
            .parameters
            .iter()
            .filter(|(k, _)| !k.ends_with("workers") && !k.ends_with("out") && !k.ends_with("format"))
            .collect();
        json!({
            "command": self.command,
            "parameters": params,
            "seed": self.seed,
            "toolkit_version": self.toolkit_version,
        })
    }
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Writes the report (to `--out` or stdout) and, for file output, the full
/// manifest next to it. `extra` lists files the command already wrote.
pub fn emit(report: &Report, out: &OutputArgs, mut manifest: RunManifest, extra: Vec<PathBuf>) -> Result<()> {
    let body = match out.format {
        Format::Csv => report.csv()?,
        Format::Json => report.json(&manifest.inline())?,
    };
    match &out.out {
        Some(path) => {
            fs::write(path, body)?;
            let side = sidecar_path(path);
            manifest.outputs = std::iter::once(path.clone()).chain(extra).chain([side.clone()]).collect();
            manifest.finished_at = now();
            let mut s = serde_json::to_string_pretty(&manifest)?;
            s.push('\n');
            fs::write(side, s)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}
