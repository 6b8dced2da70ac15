//! Rendering of command results and atomic file output.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

/// Significant digits kept in every emitted number.
pub const SIG_DIGITS: usize = 15;

/// Rounds to 15 significant digits.
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", SIG_DIGITS - 1, v).parse().unwrap_or(v)
}

/// Shortest representation of `v` rounded to 15 significant digits.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round_sig(v);
    // `-0.0` would otherwise leak a sign that depends on the operation order
    if r == 0.0 {
        return "0.0".into();
    }
    format!("{r:?}")
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let (Some(f), false) = (n.as_f64(), n.is_i64() || n.is_u64()) {
                let r = round_sig(f);
                *v = serde_json::Number::from_f64(if r == 0.0 { 0.0 } else { r }).map_or(Value::Null, Value::Number);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Serializes with every float rounded to 15 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> Result<Value, CliError> {
    let mut v = serde_json::to_value(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    round_value(&mut v);
    Ok(v)
}

pub fn json_string(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_num(*v),
            Cell::Text(t) => t.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(v) => {
                let r = round_sig(*v);
                serde_json::Number::from_f64(if r == 0.0 { 0.0 } else { r }).map_or(Value::Null, Value::Number)
            }
            Cell::Text(t) => Value::String(t.clone()),
        }
    }
}

/// A table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        self.push_cells(row.into_iter().map(Cell::Num).collect());
    }

    pub fn push_cells(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::to_csv).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| Value::Object(self.columns.iter().cloned().zip(row.iter().map(Cell::to_json)).collect()))
            .collect();
        Value::Array(rows)
    }
}

/// Result of one subcommand.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Table(Table),
    Json(Value),
    /// A table with a JSON summary written next to it (`<out>.json`) in CSV
    /// mode, or both combined under `summary` and `rows` in JSON mode.
    TableWithSummary(Table, Value),
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), v, out);
            }
        }
        Value::Number(n) if n.is_f64() => out.push((prefix.into(), fmt_num(n.as_f64().unwrap_or(f64::NAN)))),
        Value::Number(n) => out.push((prefix.into(), n.to_string())),
        Value::String(s) => out.push((prefix.into(), s.clone())),
        other => out.push((prefix.into(), other.to_string())),
    }
}

/// JSON rendered as `key,value` lines with dotted keys.
pub fn json_to_csv(v: &Value) -> String {
    let mut pairs = Vec::new();
    flatten("", v, &mut pairs);
    let mut s = String::from("key,value\n");
    for (k, v) in pairs {
        s.push_str(&format!("{k},{v}\n"));
    }
    s
}

/// Renders `output`; returns the main document and an optional side document.
pub fn render(output: &Output, format: Format) -> (String, Option<String>) {
    match (output, format) {
        (Output::Table(t), Format::Csv) => (t.to_csv(), None),
        (Output::Table(t), Format::Json) => (json_string(&t.to_json()), None),
        (Output::Json(v), Format::Json) => (json_string(v), None),
        (Output::Json(v), Format::Csv) => (json_to_csv(v), None),
        (Output::TableWithSummary(t, s), Format::Csv) => (t.to_csv(), Some(json_string(s))),
        (Output::TableWithSummary(t, s), Format::Json) => {
            let mut m = Map::new();
            m.insert("summary".into(), s.clone());
            m.insert("rows".into(), t.to_json());
            (json_string(&Value::Object(m)), None)
        }
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Path of the side document for `out`: `run.csv` → `run.csv.json`.
pub fn summary_path(out: &Path) -> std::path::PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    s.into()
}
