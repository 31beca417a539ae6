use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Fixed 12-significant-digit float formatting used by every CSV cell, so
/// reruns are byte-identical.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::Run(format!("cannot create {}: {e}", parent.display())))?;
    }
    std::fs::write(path, text)
        .map_err(|e| CliError::Run(format!("cannot write {}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Run(format!("serialization error: {e}")))?;
    text.push('\n');
    write_text(path, &text)
}

/// Provenance sidecar written next to every artifact.
#[derive(Debug, Serialize)]
pub struct Sidecar {
    pub command: String,
    pub profile: String,
    pub seed: u64,
    pub n_runs: u32,
    pub config_sha256: String,
    pub cli_version: &'static str,
}

impl Sidecar {
    pub fn new(command: &str, profile: &str, seed: u64, n_runs: u32, canonical_config: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(canonical_config.as_bytes());
        let digest = hasher.finalize();
        let config_sha256 = digest.iter().map(|b| format!("{b:02x}")).collect::<String>();
        Self {
            command: command.to_string(),
            profile: profile.to_string(),
            seed,
            n_runs,
            config_sha256,
            cli_version: env!("CARGO_PKG_VERSION"),
        }
    }

    pub fn write_for(&self, artifact: &Path) -> Result<(), CliError> {
        let mut sidecar = artifact.as_os_str().to_owned();
        sidecar.push(".meta.json");
        write_json(&PathBuf::from(sidecar), self)
    }
}

/// Writes a CSV with a header row and 12-significant-digit floats.
pub fn write_csv(
    path: &Path,
    header: &str,
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), CliError> {
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    write_text(path, &text)
}
