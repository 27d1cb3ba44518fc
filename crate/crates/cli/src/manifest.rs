use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use qcsolve::PotentialDescriptor;

/// Everything needed to rerun a command. Only `timestamp` varies between
/// identical invocations.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub potential_file: String,
    pub potential: PotentialDescriptor,
    pub config: Value,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, file: &Path, potential: &PotentialDescriptor, config: Value) -> Self {
        Self {
            command: command.to_string(),
            potential_file: file.display().to_string(),
            potential: potential.clone(),
            config,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

/// `<out>.manifest.json` next to an output file.
pub fn sidecar_path(out: &Path) -> std::path::PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    name.into()
}
