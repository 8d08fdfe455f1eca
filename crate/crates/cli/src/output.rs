use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("cannot create directory {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write to {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Raw config bytes with their path, read once so the hash matches what was parsed.
pub struct ConfigInput {
    pub path: String,
    pub bytes: Vec<u8>,
}

impl ConfigInput {
    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).with_context(|| format!("cannot read config {}", path.display()))?;
        Ok(ConfigInput { path: path.display().to_string(), bytes })
    }

    pub fn bundled(name: &str, text: &str) -> Self {
        ConfigInput { path: format!("<bundled>/{name}"), bytes: text.as_bytes().to_vec() }
    }

    pub fn parse<T: serde::de::DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_slice(&self.bytes).with_context(|| format!("cannot parse config {}", self.path))
    }

    pub fn record(&self) -> ConfigRecord {
        ConfigRecord { path: self.path.clone(), sha256: sha256_hex(&self.bytes) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub siba_core: &'static str,
    pub siba_cli: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: Option<ConfigRecord>,
    pub outputs: Vec<String>,
    /// Unix time at start, seconds.
    pub started_at: f64,
    pub wall_clock_s: f64,
    pub versions: Versions,
    pub seed: u64,
    pub threads: usize,
}

pub struct Run {
    subcommand: String,
    config: Option<ConfigRecord>,
    outputs: Vec<PathBuf>,
    started_at: f64,
    clock: Instant,
    seed: u64,
}

impl Run {
    pub fn start(subcommand: &str, seed: u64) -> Self {
        let started_at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        Run { subcommand: subcommand.to_string(), config: None, outputs: Vec::new(), started_at, clock: Instant::now(), seed }
    }

    pub fn config(&mut self, input: &ConfigInput) {
        self.config = Some(input.record());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn manifest(&self) -> RunManifest {
        RunManifest {
            subcommand: self.subcommand.clone(),
            config: self.config.clone(),
            outputs: self.outputs.iter().map(|p| p.display().to_string()).collect(),
            started_at: self.started_at,
            wall_clock_s: self.clock.elapsed().as_secs_f64(),
            versions: Versions { siba_core: siba_core::experiments::VERSION, siba_cli: env!("CARGO_PKG_VERSION") },
            seed: self.seed,
            threads: rayon::current_num_threads(),
        }
    }
}
