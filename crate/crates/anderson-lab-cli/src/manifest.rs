//! Run manifests: the effective config, its hash, and a content-hashed
//! list of every output file.

use crate::config::RunConfig;
use anderson_lab::io::fnv1a;
use anyhow::{Context, Result};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Serialize)]
struct OutputEntry {
    file: String,
    bytes: u64,
    fnv64: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    crate_version: &'a str,
    created_unix_secs: u64,
    seed: u64,
    threads_hint: Option<usize>,
    config_fnv64: String,
    config: &'a RunConfig,
    wall_secs: f64,
    outputs: Vec<OutputEntry>,
}

/// A run directory `<outdir>/<experiment>/<timestamp>-<confighash>/` that
/// collects outputs and finishes with a `manifest.json`.
pub struct RunDir {
    pub dir: PathBuf,
    experiment: String,
    config: RunConfig,
    config_hash: u64,
    started: Instant,
    outputs: Vec<PathBuf>,
}

pub fn config_hash(config: &RunConfig) -> u64 {
    let canonical = serde_json::to_string(config).expect("config serializes");
    fnv1a(canonical.as_bytes())
}

fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl RunDir {
    pub fn create(outdir: &Path, experiment: &str, config: &RunConfig) -> Result<Self> {
        let hash = config_hash(config);
        let dir = outdir
            .join(experiment)
            .join(format!("{}-{hash:016x}", unix_now()));
        std::fs::create_dir_all(&dir)
            .with_context(|| format!("creating run dir {}", dir.display()))?;
        Ok(RunDir {
            dir,
            experiment: experiment.to_string(),
            config: config.clone(),
            config_hash: hash,
            started: Instant::now(),
            outputs: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Register an output file written under the run directory.
    pub fn register(&mut self, path: PathBuf) {
        self.outputs.push(path);
    }

    /// Write `manifest.json` listing every registered output with its
    /// content hash. (Wall time and the directory timestamp are metadata,
    /// outside the byte-determinism contract the data files obey.)
    pub fn finish(self) -> Result<PathBuf> {
        let mut outputs = Vec::new();
        for p in &self.outputs {
            let bytes = std::fs::read(p)
                .with_context(|| format!("hashing output {}", p.display()))?;
            outputs.push(OutputEntry {
                file: p
                    .file_name()
                    .map(|f| f.to_string_lossy().into_owned())
                    .unwrap_or_default(),
                bytes: bytes.len() as u64,
                fnv64: format!("{:016x}", fnv1a(&bytes)),
            });
        }
        let manifest = Manifest {
            experiment: &self.experiment,
            crate_version: env!("CARGO_PKG_VERSION"),
            created_unix_secs: unix_now(),
            seed: self.config.seed,
            threads_hint: self.config.threads,
            config_fnv64: format!("{:016x}", self.config_hash),
            config: &self.config,
            wall_secs: self.started.elapsed().as_secs_f64(),
            outputs,
        };
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
        Ok(path)
    }
}
