//! Run manifests: what was run, on which inputs, with which settings.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the canonical JSON of the effective options.
    pub config_hash: String,
    /// Input path as given → SHA-256 of its bytes.
    pub input_digests: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub tool_version: String,
    /// Seconds since the Unix epoch; `SOURCE_DATE_EPOCH` overrides the clock.
    pub timestamp: u64,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.trim().parse().ok()) {
        return t;
    }
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

impl RunManifest {
    pub fn new(command: &str, options: &impl Serialize, seed: Option<u64>) -> Self {
        let canonical = serde_json::to_vec(&serde_json::to_value(options).expect("options serialize")).expect("value serializes");
        RunManifest {
            command: command.to_string(),
            config_hash: sha256_hex(&canonical),
            input_digests: BTreeMap::new(),
            seed,
            tool_version: TOOL_VERSION.to_string(),
            timestamp: timestamp(),
        }
    }

    /// Reads an input file, records its digest and returns its text.
    pub fn read_input(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        self.input_digests.insert(path.display().to_string(), sha256_hex(&bytes));
        String::from_utf8(bytes).map_err(|_| CliError::input(format!("{} is not valid UTF-8", path.display())))
    }

    pub fn footer(&self) -> String {
        format!(
            "# {} | config {} | seed {} | {}",
            self.command,
            &self.config_hash[..12],
            self.seed.map_or("-".to_string(), |s| s.to_string()),
            self.tool_version
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_hash_depends_only_on_options() {
        let a = RunManifest::new("split", &serde_json::json!({"ratios": [0.8, 0.05, 0.15]}), Some(1));
        let b = RunManifest::new("split", &serde_json::json!({"ratios": [0.8, 0.05, 0.15]}), Some(1));
        let c = RunManifest::new("split", &serde_json::json!({"ratios": [0.7, 0.15, 0.15]}), Some(1));
        assert_eq!(a.config_hash, b.config_hash);
        assert_ne!(a.config_hash, c.config_hash);
        assert_eq!(a.config_hash.len(), 64);
    }
}
