//! Deterministic tabular output: CSV with `#` metadata lines, or JSON.
//!
//! Every emitted document begins with the tool version, the command name,
//! and the full resolved parameter set, so a data file is self-describing
//! and two runs with identical configuration are byte-identical.

use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::config::GridAxis;

/// Environment variable selecting the default directory for relative
/// output paths (and for default figure file names).
pub const OUT_DIR_ENV: &str = "SQUEEZECOOL_OUT_DIR";

/// A command failure, split by the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Invalid configuration: exit code 2. Names the offending key.
    Config { key: String, message: String },
    /// Numerical failure (instability, non-convergence, ...): exit code 3.
    Numeric { message: String },
}

impl Failure {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Failure::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Failure::Numeric {
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config { .. } => 2,
            Failure::Numeric { .. } => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config { key, message } => {
                write!(f, "configuration error for key `{key}`: {message}")
            }
            Failure::Numeric { message } => write!(f, "numerical failure: {message}"),
        }
    }
}

impl From<squeezecool::Error> for Failure {
    fn from(err: squeezecool::Error) -> Self {
        match err {
            // Parameter validation failures are configuration mistakes:
            // surface the offending key so the user can fix the config.
            squeezecool::Error::InvalidParam { name, reason } => Failure::Config {
                key: name.to_string(),
                message: reason,
            },
            other => Failure::Numeric {
                message: other.to_string(),
            },
        }
    }
}

/// One table cell: a number, a short status/text token, or empty.
#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            // Rust's float Display is the shortest round-trip representation,
            // which is deterministic across runs and platforms.
            Cell::Num(x) if x.is_finite() => format!("{x}"),
            Cell::Num(_) => String::new(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x)
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
            Cell::Text(s) => serde_json::Value::String(s.clone()),
            Cell::Empty => serde_json::Value::Null,
        }
    }
}

/// Header metadata attached to every output document.
#[derive(Debug, Clone)]
pub struct Meta {
    pub command: String,
    /// Sorted `key = value` pairs: the full resolved parameter set,
    /// including defaults that were filled in.
    pub params: Vec<(String, String)>,
    pub grids: Vec<GridAxis>,
}

impl Meta {
    pub fn tool() -> String {
        format!("squeezecool {}", env!("CARGO_PKG_VERSION"))
    }
}

/// Output format for tabular data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
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

/// A rectangular result table with named columns and header metadata.
#[derive(Debug)]
pub struct Table {
    pub meta: Meta,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(meta: Meta, columns: &[&str]) -> Self {
        Table {
            meta,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, cells: Vec<Cell>) {
        assert_eq!(
            cells.len(),
            self.columns.len(),
            "row width must match the column count"
        );
        self.rows.push(cells);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# tool: {}\n", Meta::tool()));
        out.push_str(&format!("# command: {}\n", self.meta.command));
        for (key, value) in &self.meta.params {
            out.push_str(&format!("# param {key} = {value}\n"));
        }
        for axis in &self.meta.grids {
            out.push_str(&format!("# grid {}\n", axis.describe()));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    fn render_json(&self) -> String {
        use serde_json::{json, Map, Value};
        // serde_json maps iterate in key order when built from a BTreeMap-like
        // insertion into Map with sorted keys; we sort explicitly to keep the
        // byte stream deterministic.
        let mut params = Map::new();
        for (key, value) in &self.meta.params {
            params.insert(key.clone(), Value::String(value.clone()));
        }
        let grids: Vec<Value> = self
            .meta
            .grids
            .iter()
            .map(|axis| {
                json!({
                    "count": axis.count,
                    "max": axis.max,
                    "min": axis.min,
                    "name": axis.name,
                    "spacing": if axis.log { "log" } else { "lin" },
                })
            })
            .collect();
        let mut columns = Map::new();
        for (idx, name) in self.columns.iter().enumerate() {
            let values: Vec<Value> = self.rows.iter().map(|row| row[idx].json()).collect();
            columns.insert(name.clone(), Value::Array(values));
        }
        let doc = json!({
            "column_order": self.columns,
            "columns": Value::Object(columns),
            "metadata": {
                "command": self.meta.command,
                "grids": grids,
                "params": Value::Object(params),
                "tool": Meta::tool(),
            },
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("JSON serialization");
        text.push('\n');
        text
    }
}

/// Resolve an `--out` path: absolute paths pass through; relative paths are
/// placed under the directory named by `SQUEEZECOOL_OUT_DIR` when that
/// variable is set. `None` means standard output.
pub fn resolve_out(out: Option<&str>) -> Option<PathBuf> {
    let path = Path::new(out?);
    if path.is_absolute() {
        return Some(path.to_path_buf());
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) => Some(PathBuf::from(dir).join(path)),
        None => Some(path.to_path_buf()),
    }
}

/// Default location for a file the tool names itself (figure outputs):
/// under `SQUEEZECOOL_OUT_DIR` when set, otherwise the working directory.
pub fn default_out(file_name: &str) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) => PathBuf::from(dir).join(file_name),
        None => PathBuf::from(file_name),
    }
}

/// Write rendered output to a file or standard output.
pub fn write_output(content: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        None => {
            std::io::stdout()
                .write_all(content.as_bytes())
                .map_err(|e| Failure::numeric(format!("cannot write to stdout: {e}")))?;
        }
        Some(path) => {
            std::fs::write(path, content).map_err(|e| {
                Failure::config("out", format!("cannot write `{}`: {e}", path.display()))
            })?;
        }
    }
    Ok(())
}
