use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    Ok(sha256_hex(&std::fs::read(path)?))
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// One invocation recorded for replay.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandRecord {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub args: Vec<String>,
}

/// Provenance of a run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    /// External input files and their SHA-256.
    pub inputs: BTreeMap<String, String>,
    /// Digest of the configuration, seed and inputs.
    pub digest: String,
    pub commands: Vec<CommandRecord>,
    /// Output files relative to the run directory, with their SHA-256.
    pub artifacts: BTreeMap<String, String>,
    pub created_unix: u64,
    pub updated_unix: u64,
}

impl Manifest {
    pub fn new(config: ExperimentConfig, inputs: BTreeMap<String, String>) -> Result<Self> {
        let now = unix_now();
        let digest = Self::compute_digest(&config, &inputs)?;
        Ok(Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            config,
            inputs,
            digest,
            commands: Vec::new(),
            artifacts: BTreeMap::new(),
            created_unix: now,
            updated_unix: now,
        })
    }

    pub fn compute_digest(config: &ExperimentConfig, inputs: &BTreeMap<String, String>) -> Result<String> {
        #[derive(Serialize)]
        struct Basis<'a> {
            config: &'a ExperimentConfig,
            seed: u64,
            inputs: &'a BTreeMap<String, String>,
        }
        let basis = serde_json::to_vec(&Basis { config, seed: config.seed, inputs })?;
        Ok(sha256_hex(&basis))
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let path = dir.as_ref().join(MANIFEST_FILE);
        if !path.exists() {
            return Err(Error::MissingArtifact(path));
        }
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        std::fs::write(dir.as_ref().join(MANIFEST_FILE), s)?;
        Ok(())
    }
}
