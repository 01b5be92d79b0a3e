//! Result persistence: atomic writes, CSV flattening and run manifests.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: Value,
    pub seed: u64,
    pub code_version: String,
    pub wall_time_secs: f64,
    pub outputs: Vec<OutputFile>,
}

/// Writes to a sibling temporary file, then renames over the target.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

pub fn checksum(path: &Path) -> io::Result<OutputFile> {
    let bytes = fs::read(path)?;
    Ok(OutputFile {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        _ => v.to_string(),
    }
}

/// One row per array element (or a single row for an object); nested values are
/// written as JSON text. Columns follow first appearance.
pub fn to_csv(v: &Value) -> io::Result<String> {
    let rows: Vec<&Value> = match v {
        Value::Array(a) => a.iter().collect(),
        other => vec![other],
    };
    let mut cols: Vec<String> = Vec::new();
    for r in &rows {
        match r {
            Value::Object(m) => {
                for k in m.keys() {
                    if !cols.contains(k) {
                        cols.push(k.clone());
                    }
                }
            }
            _ if !cols.iter().any(|c| c == "value") => cols.push("value".into()),
            _ => {}
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&cols)?;
    for r in rows {
        let rec: Vec<String> = cols
            .iter()
            .map(|c| match r {
                Value::Object(m) => m.get(c).map(cell).unwrap_or_default(),
                other if c == "value" => cell(other),
                _ => String::new(),
            })
            .collect();
        w.write_record(&rec)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| io::Error::other(e.to_string()))?;
    String::from_utf8(bytes).map_err(io::Error::other)
}
