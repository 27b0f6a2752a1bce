//! Run manifests: a JSON record that fully determines a run given the binary
//! version. Re-running the same command on the same input reproduces every
//! artifact bit for bit, so manifests carry SHA-256 checksums of the input
//! and of each written artifact. Nothing clock- or path-dependent goes in.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use wlbayes::predict::{ClassifyRule, LooOptions};
use wlbayes::simdata::SimConfig;
use wlbayes::{ModelSpec, SamplerConfig, WeightingMode};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
    pub outcome_column: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predictors: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LooRecord {
    pub threshold: f64,
    pub rule: ClassifyRule,
    pub options: LooOptions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<InputRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weighting: Option<WeightingMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loo: Option<LooRecord>,
    /// Inputs of a compare run: (label, metrics.json sha256) pairs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compared: Option<Vec<(String, String)>>,
    pub artifacts: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            tool: "wlbayes".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            input: None,
            sim: None,
            model: None,
            weighting: None,
            sampler: None,
            loo: None,
            compared: None,
            artifacts: BTreeMap::new(),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Write atomically: temp file in the destination directory, then rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    std::io::Write::write_all(&mut tmp, bytes)?;
    let path = dir.join(name);
    tmp.persist(&path)?;
    Ok(path)
}

/// Write an artifact, recording its checksum in the manifest.
pub fn write_artifact(
    manifest: &mut RunManifest,
    dir: &Path,
    name: &str,
    bytes: &[u8],
) -> anyhow::Result<()> {
    write_atomic(dir, name, bytes)?;
    manifest
        .artifacts
        .insert(name.to_string(), sha256_hex(bytes));
    Ok(())
}

/// Serialize and write the manifest itself (not listed in its own artifact
/// map).
pub fn write_manifest(manifest: &RunManifest, dir: &Path) -> anyhow::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(manifest)?;
    bytes.push(b'\n');
    write_atomic(dir, "manifest.json", &bytes)?;
    Ok(())
}
