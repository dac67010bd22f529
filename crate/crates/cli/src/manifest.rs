//! Run manifests: every command records its parameters, seeds, and the
//! SHA-256 of each artifact it wrote, so a run can be replayed and checked
//! byte for byte.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Serialize)]
pub struct ArtifactRecord {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Serialize)]
pub struct Manifest {
    pub tool_version: &'static str,
    pub command: String,
    pub parameters: serde_json::Value,
    pub master_seed: u64,
    pub derived_seed: u64,
    pub artifacts: Vec<ArtifactRecord>,
}

impl Manifest {
    pub fn new(command: &str, parameters: serde_json::Value, master_seed: u64) -> Self {
        Manifest {
            tool_version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            parameters,
            master_seed,
            derived_seed: derive_seed(command, master_seed),
            artifacts: Vec::new(),
        }
    }

    pub fn record(&mut self, path: &Path) -> Result<(), CliError> {
        let data = std::fs::read(path)?;
        let mut hasher = Sha256::new();
        hasher.update(&data);
        let digest = hasher.finalize();
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.artifacts.push(ArtifactRecord {
            name: path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            sha256: hex,
            bytes: data.len() as u64,
        });
        Ok(())
    }

    pub fn write(&self, out_dir: &Path) -> Result<PathBuf, CliError> {
        let path = out_dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }
}

/// All randomness flows from one master seed: the subcommand seed is the
/// FNV-1a hash of the subcommand name XORed with the master seed.
pub fn derive_seed(command: &str, master_seed: u64) -> u64 {
    tide_core::rng::fnv1a(command.as_bytes()) ^ master_seed
}
