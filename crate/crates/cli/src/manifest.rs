//! Run manifests: a JSON record of what a campaign ran with and what it
//! produced, sufficient to reproduce the outputs bit-exactly.

use chrono::{SecondsFormat, Utc};
use seqab_core::engine::ExperimentConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Version of this toolkit.
    pub version: String,
    /// Subcommand that produced the outputs.
    pub command: String,
    /// Fully resolved campaign configuration.
    pub config: ExperimentConfig,
    /// Campaign seed, duplicated from the config for quick reference.
    pub seed: u64,
    pub started_at: String,
    pub finished_at: String,
    /// Files the run wrote, relative to the invocation directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config: ExperimentConfig,
        started_at: String,
        finished_at: String,
        outputs: Vec<String>,
    ) -> Self {
        RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed: config.seed,
            config,
            started_at,
            finished_at,
            outputs,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Current time in RFC 3339 form, as stored in manifests.
pub fn timestamp() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}
