//! Artifact writers. Every file starts with a commented metadata header
//! (CSV) or carries a `meta` object (JSON): version, subcommand, the full
//! effective parameter set, and the seed where one applies. Nothing
//! time-dependent is ever written, so identical invocations produce
//! byte-identical artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Result;
use serde::Serialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Effective run parameters, in insertion order.
#[derive(Debug, Clone, Default)]
pub struct Meta {
    pub command: &'static str,
    pub params: Vec<(String, String)>,
}

impl Meta {
    pub fn new(command: &'static str) -> Self {
        Meta {
            command,
            params: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn comment_header(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# helix {VERSION}");
        let _ = writeln!(s, "# command: {}", self.command);
        for (k, v) in &self.params {
            let _ = writeln!(s, "# {k}: {v}");
        }
        s
    }

    fn json_value(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        map.insert("version".into(), VERSION.into());
        map.insert("command".into(), self.command.into());
        for (k, v) in &self.params {
            map.insert(k.clone(), v.clone().into());
        }
        serde_json::Value::Object(map)
    }
}

/// Errors while creating or writing an output path; mapped to exit code 3.
#[derive(Debug, thiserror::Error)]
#[error("cannot write {path}: {source}")]
pub struct OutputError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

fn write_artifact(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => {
            std::fs::write(path, content).map_err(|source| OutputError {
                path: path.to_path_buf(),
                source,
            })?;
            Ok(())
        }
    }
}

/// CSV artifact: metadata comments, header line, then rows.
pub fn write_csv(out: Option<&Path>, meta: &Meta, header: &str, rows: &[String]) -> Result<()> {
    let mut s = meta.comment_header();
    let _ = writeln!(s, "{header}");
    for row in rows {
        let _ = writeln!(s, "{row}");
    }
    write_artifact(out, &s)
}

/// JSON artifact: `{ "meta": ..., "result": ... }`, pretty-printed.
pub fn write_json<T: Serialize>(out: Option<&Path>, meta: &Meta, payload: &T) -> Result<()> {
    let doc = serde_json::json!({
        "meta": meta.json_value(),
        "result": payload,
    });
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    write_artifact(out, &s)
}

/// Path of the sidecar run-metadata JSON next to a tabular artifact.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    out.with_file_name(name)
}

/// Shortest round-trip float formatting (every printed value parses back
/// to the identical f64).
pub fn fmt_f64(v: f64) -> String {
    let mut s = String::new();
    let _ = write!(s, "{v}");
    s
}
