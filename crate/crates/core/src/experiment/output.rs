//! Writing a run to disk: hash-named directory, output files, manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{ExperimentConfig, RunError, RunOutput};

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// SHA-256 of the canonical (key-sorted, compact) JSON form of the config.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let v = serde_json::to_value(cfg).expect("config serializes");
    sha256_hex(serde_json::to_string(&v).expect("value serializes").as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub experiment: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub threads: usize,
    pub library_version: &'static str,
    pub created_unix_s: u64,
    pub config: ExperimentConfig,
    pub files: Vec<FileRecord>,
}

/// Fresh directory `<root>/<kind>-<hash12>`, suffixed `-2`, `-3`, ... if taken.
fn fresh_dir(root: &Path, stem: &str) -> PathBuf {
    let mut dir = root.join(stem);
    let mut k = 2;
    while dir.exists() {
        dir = root.join(format!("{stem}-{k}"));
        k += 1;
    }
    dir
}

/// Write `out` under `root`; returns the run directory. Nothing is left behind on failure.
pub fn write_run(root: &Path, cfg: &ExperimentConfig, out: &RunOutput, threads: usize) -> Result<PathBuf, RunError> {
    let hash = config_hash(cfg);
    fs::create_dir_all(root)?;
    let dir = fresh_dir(root, &format!("{}-{}", cfg.experiment.name(), &hash[..12]));
    let result = write_into(&dir, cfg, out, threads, hash);
    if result.is_err() {
        let _ = fs::remove_dir_all(&dir);
    }
    result.map(|_| dir)
}

fn write_into(dir: &Path, cfg: &ExperimentConfig, out: &RunOutput, threads: usize, hash: String) -> Result<(), RunError> {
    fs::create_dir(dir)?;
    let mut files = Vec::with_capacity(out.files.len() + 1);
    let summary = serde_json::to_string_pretty(&out.summary).expect("summary serializes") + "\n";
    for (name, body) in out.files.iter().chain(std::iter::once((&"summary.json".to_string(), &summary))) {
        fs::write(dir.join(name), body)?;
        files.push(FileRecord {
            name: name.clone(),
            bytes: body.len(),
            sha256: sha256_hex(body.as_bytes()),
        });
    }
    let manifest = Manifest {
        experiment: cfg.experiment.name(),
        config_hash: hash,
        seed: cfg.seed,
        threads,
        library_version: env!("CARGO_PKG_VERSION"),
        created_unix_s: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        config: cfg.clone(),
        files,
    };
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n",
    )?;
    Ok(())
}
