use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::manifest::{sidecar_path, RunManifest};

#[derive(Debug)]
pub enum CliError {
    Io { path: PathBuf, source: io::Error },
    Parse { path: PathBuf, source: serde_json::Error },
    Solver(qcsolve::Error),
    Usage(String),
    NonFinite(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Parse { path, source } => write!(f, "malformed potential JSON in {}: {source}", path.display()),
            CliError::Solver(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::NonFinite(what) => write!(f, "refusing to write non-finite value for {what}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<qcsolve::Error> for CliError {
    fn from(e: qcsolve::Error) -> Self {
        CliError::Solver(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn finite(value: f64, what: impl FnOnce() -> String) -> CliResult<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::NonFinite(what()))
    }
}

/// Seventeen significant digits.
pub fn num(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn opt_num(value: Option<f64>) -> String {
    value.map(num).unwrap_or_default()
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn write_sidecar(out: &Path, manifest: &RunManifest) -> CliResult<()> {
    let path = sidecar_path(out);
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|source| CliError::Io { path, source })
}

/// JSON document with the manifest embedded under `"manifest"`.
pub fn write_json<T: Serialize>(out: Option<&Path>, manifest: &RunManifest, body: &T) -> CliResult<()> {
    let mut doc = serde_json::to_value(body).expect("output serializes");
    if let Value::Object(map) = &mut doc {
        map.insert("manifest".into(), serde_json::to_value(manifest).expect("manifest serializes"));
    }
    let mut text = serde_json::to_string_pretty(&doc).expect("output serializes");
    text.push('\n');
    emit(out, text.as_bytes())?;
    if let Some(path) = out {
        write_sidecar(path, manifest)?;
    }
    Ok(())
}

/// CSV table. The manifest goes to the sidecar file, or to stderr as one
/// JSON line when writing to stdout.
pub fn write_csv(out: Option<&Path>, manifest: &RunManifest, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Usage(format!("CSV encoding failed: {e}"));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(format!("CSV encoding failed: {e}")))?;
    emit(out, &bytes)?;
    match out {
        Some(path) => write_sidecar(path, manifest),
        None => {
            eprintln!("{}", serde_json::to_string(manifest).expect("manifest serializes"));
            Ok(())
        }
    }
}
