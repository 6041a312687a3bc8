use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Normalized;
use crate::experiments;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

impl Assertion {
    pub fn new(name: &str, passed: bool, value: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            passed,
            value,
            threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub config_hash: String,
    pub versions: BTreeMap<String, String>,
    pub threads: usize,
    pub wall_time_s: f64,
    pub files: Vec<FileRecord>,
    pub assertions: Vec<Assertion>,
    pub error: Option<String>,
    pub passed: bool,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([
        (
            "frontlab-cli".to_string(),
            env!("CARGO_PKG_VERSION").to_string(),
        ),
        ("manifest".to_string(), "1".to_string()),
    ])
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<FileRecord> {
    let path = dir.join(name);
    std::fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(FileRecord {
        path: name.to_string(),
        sha256: sha256_hex(bytes),
        bytes: bytes.len() as u64,
    })
}

/// Runs a validated config, writes its outputs and `manifest.json` into the output
/// directory. Experiment errors are recorded in the manifest rather than returned.
pub fn run_experiment(n: &Normalized) -> Result<RunManifest> {
    let dir = &n.config.output_dir;
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let config_text = serde_json::to_string_pretty(&n.config)?;
    let t0 = Instant::now();
    let result = experiments::run(n);
    let wall_time_s = t0.elapsed().as_secs_f64();
    let mut files = vec![write(dir, "config.json", config_text.as_bytes())?];
    let (assertions, error) = match result {
        Ok(out) => {
            for (name, bytes) in &out.files {
                files.push(write(dir, name, bytes)?);
            }
            (out.assertions, None)
        }
        Err(e) => (Vec::new(), Some(format!("{e:#}"))),
    };
    let passed = error.is_none() && assertions.iter().all(|a| a.passed);
    let manifest = RunManifest {
        experiment: n.config.experiment.name().to_string(),
        config_hash: sha256_hex(config_text.as_bytes()),
        versions: versions(),
        threads: rayon::current_num_threads(),
        wall_time_s,
        files,
        assertions,
        error,
        passed,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(dir.join("manifest.json"), text)?;
    Ok(manifest)
}
