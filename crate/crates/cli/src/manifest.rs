//! Stage bookkeeping: per-stage manifests, the consolidated run manifest,
//! config-copy integrity, and the output-directory lock.
//!
//! Everything written here is deterministic for a given config and seed:
//! wall-clock timing goes to stderr only, while manifests carry item
//! counts per stage.

use crate::config::{sha256_hex, RunConfig};
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

pub const CONFIG_COPY: &str = "config.toml";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageManifest {
    pub stage: String,
    pub config_hash: String,
    pub artifact_version: String,
    /// Output files, relative to the run directory.
    pub files: Vec<String>,
    /// Deterministic work counters (rows, folds, candidates, ...).
    pub items: BTreeMap<String, u64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub artifact_version: String,
    pub stages: BTreeMap<String, StageManifest>,
    /// Every emitted file across stages plus the report's own outputs.
    pub files: Vec<String>,
    pub warnings: Vec<String>,
}

pub fn artifact_version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

/// Guard over the run directory; a second concurrent writer fails fast.
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn acquire(out_dir: &Path) -> Result<DirLock> {
        fs::create_dir_all(out_dir)
            .with_context(|| format!("creating output directory {}", out_dir.display()))?;
        let path = out_dir.join(".patval.lock");
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(DirLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => bail!(
                "output directory {} is locked by another run (remove {} if stale)",
                out_dir.display(),
                path.display()
            ),
            Err(e) => Err(e).with_context(|| format!("locking {}", out_dir.display())),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Store the effective config in the run directory (first stage) or check
/// that the stored copy matches byte-for-byte (later stages, reruns).
/// Returns the config hash.
pub fn persist_config(out_dir: &Path, config: &RunConfig) -> Result<String> {
    let canonical = config.canonical_toml()?;
    let path = out_dir.join(CONFIG_COPY);
    if path.exists() {
        let stored = fs::read_to_string(&path)
            .with_context(|| format!("reading stored config {}", path.display()))?;
        if stored != canonical {
            bail!(
                "stored config {} differs from the effective config; \
                 earlier stages ran with different settings",
                path.display()
            );
        }
    } else {
        fs::write(&path, &canonical)
            .with_context(|| format!("writing config copy {}", path.display()))?;
    }
    Ok(sha256_hex(canonical.as_bytes()))
}

pub fn write_stage_manifest(out_dir: &Path, manifest: &StageManifest) -> Result<()> {
    let dir = out_dir.join("manifest");
    fs::create_dir_all(&dir)?;
    let path = dir.join(format!("{}.json", manifest.stage));
    let json = serde_json::to_string_pretty(manifest)?;
    fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_stage_manifest(out_dir: &Path, stage: &str) -> Result<StageManifest> {
    let path = out_dir.join("manifest").join(format!("{stage}.json"));
    let text = fs::read_to_string(&path)
        .with_context(|| format!("missing stage output: {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Verify a stage manifest against the current config hash and the
/// presence of its files.
pub fn verify_stage(out_dir: &Path, manifest: &StageManifest, config_hash: &str) -> Result<()> {
    if manifest.config_hash != config_hash {
        bail!(
            "integrity: stage {} ran with config hash {} but the stored config hashes to {}",
            manifest.stage,
            manifest.config_hash,
            config_hash
        );
    }
    for file in &manifest.files {
        if !out_dir.join(file).exists() {
            bail!("stage {} output {} is missing", manifest.stage, file);
        }
    }
    Ok(())
}

/// Deterministic JSON writer helper used by every stage.
pub fn write_json<T: Serialize>(out_dir: &Path, rel: &str, value: &T) -> Result<()> {
    let path = out_dir.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let json = serde_json::to_string_pretty(value)?;
    fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
