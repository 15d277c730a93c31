//! Output files. CSV files open with `#` comment lines naming the tool
//! version, the command and the SHA-256 of the configuration text, followed
//! by one column-header line. JSON reports carry the same fields at the top
//! level.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Map, Value};

pub const TOOL: &str = "horseshoe-lab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Collects the files written by one command and records them in a manifest.
pub struct Output {
    dir: PathBuf,
    command: String,
    hash: String,
    written: Vec<String>,
}

impl Output {
    pub fn new(dir: &Path, command: &str, hash: &str) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            hash: hash.to_string(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn header(&self) -> String {
        format!(
            "# {TOOL} {VERSION}\n# command: {}\n# config_sha256: {}\n",
            self.command, self.hash
        )
    }

    fn put(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Writes a CSV table; `rows` are already formatted fields.
    pub fn csv(&mut self, name: &str, columns: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let mut body = self.header();
        body.push_str(&columns.join(","));
        body.push('\n');
        for row in rows {
            body.push_str(&row.join(","));
            body.push('\n');
        }
        self.put(name, &body)
    }

    /// Writes a JSON report with the provenance fields prepended.
    pub fn json<T: Serialize>(&mut self, name: &str, report: &T) -> Result<()> {
        let value = serde_json::to_value(report)?;
        let mut obj = Map::new();
        obj.insert("tool".into(), json!(TOOL));
        obj.insert("version".into(), json!(VERSION));
        obj.insert("command".into(), json!(self.command));
        obj.insert("config_sha256".into(), json!(self.hash));
        match value {
            Value::Object(m) => obj.extend(m),
            other => {
                obj.insert("data".into(), other);
            }
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(obj))?;
        text.push('\n');
        self.put(name, &text)
    }

    /// Lists the files written so far with the run status. Called on every
    /// exit path so that partial outputs stay identifiable.
    pub fn manifest(&mut self, status: &str, error: Option<&str>) -> Result<()> {
        let files = self.written.clone();
        self.json(
            "manifest.json",
            &json!({ "status": status, "error": error, "files": files }),
        )
    }
}

/// Shortest round-trip decimal form; NaN and infinities spelled out.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        let mut s = String::new();
        write!(s, "{x:?}").unwrap();
        s
    }
}

/// JSON has no infinities; encode them as null.
pub fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}
