//! Provenance block embedded in every artifact.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    /// SHA-256 of the resolved configuration, serialized as JSON.
    pub config_sha256: String,
    /// False while a run is in progress or after it failed.
    pub complete: bool,
}

impl Provenance {
    pub fn new<T: Serialize>(command: &str, seed: u64, resolved_config: &T) -> Self {
        let bytes = serde_json::to_vec(resolved_config).unwrap_or_default();
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            config_sha256: sha256_hex(&bytes),
            complete: true,
        }
    }

    /// `# key=value` lines for text artifacts.
    pub fn comment_header(&self, prefix: &str) -> String {
        format!(
            "{prefix} {} {} {}\n{prefix} seed={} config_sha256={}{}\n",
            self.tool,
            self.version,
            self.command,
            self.seed,
            self.config_sha256,
            if self.complete { "" } else { " INCOMPLETE" }
        )
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
