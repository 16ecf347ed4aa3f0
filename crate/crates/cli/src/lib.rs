// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Batch front end: a JSON run configuration goes in, `result.json`,
//! `table.csv` and `manifest.json` come out.

// `!(x > 0.0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use commands::{execute, Artifacts, Table};
pub use config::{Command, Job, RunConfig};

pub const RESULT_FILE: &str = "result.json";
pub const TABLE_FILE: &str = "table.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Schema(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] metrokit::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Configuration after command-line overrides, with validated parameters.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub config: RunConfig,
    pub job: Job,
    pub output_dir: PathBuf,
    pub config_sha256: String,
}

impl ResolvedRun {
    pub fn new(mut config: RunConfig, opts: &RunOptions) -> Result<Self, CliError> {
        if let Some(seed) = opts.seed {
            config.seed = seed;
        }
        if let Some(out) = &opts.out {
            config.output_dir = Some(out.clone());
        }
        let output_dir = config
            .output_dir
            .clone()
            .ok_or_else(|| CliError::Schema("no output directory: set output_dir or pass --out".into()))?;
        let job = config.resolve()?;
        let config_sha256 = hex::encode(Sha256::digest(config.canonical_json().as_bytes()));
        Ok(Self { config, job, output_dir, config_sha256 })
    }

    /// Plan printed by `--dry-run`: the command, seed, output location and
    /// the parameters with defaults filled in.
    pub fn plan(&self) -> serde_json::Value {
        serde_json::json!({
            "command": self.config.command,
            "seed": self.config.seed,
            "output_dir": self.output_dir,
            "config_sha256": self.config_sha256,
            "parameters": self.job,
            "outputs": [RESULT_FILE, TABLE_FILE, MANIFEST_FILE],
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_sha256: String,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub wall_time_seconds: f64,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<String>,
    pub outputs: Vec<&'static str>,
}

/// Outcome of [`run`]: the manifest that was written and the process exit
/// code.
#[derive(Debug)]
pub struct RunReport {
    pub manifest: Manifest,
    pub exit_code: i32,
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.into()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Executes a resolved run and writes its artifacts. A numerical failure
/// still writes the manifest, with the error under `diagnostics`.
pub fn run(resolved: &ResolvedRun, jobs: Option<usize>) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let outcome = execute(&resolved.job, resolved.config.seed);
    let wall = start.elapsed().as_secs_f64();
    let dir = &resolved.output_dir;
    std::fs::create_dir_all(dir)?;
    let mut manifest = Manifest {
        tool: "metrokit",
        version: env!("CARGO_PKG_VERSION"),
        command: resolved.config.command.name(),
        config_sha256: resolved.config_sha256.clone(),
        seed: resolved.config.seed,
        jobs,
        wall_time_seconds: wall,
        status: "ok",
        diagnostics: None,
        outputs: vec![RESULT_FILE, TABLE_FILE],
    };
    let exit_code = match outcome {
        Ok(art) => {
            write_json(&dir.join(RESULT_FILE), &art.result)?;
            std::fs::write(dir.join(TABLE_FILE), art.table.to_csv())?;
            0
        }
        Err(err) => {
            log::error!("{err}");
            manifest.status = "numerical_failure";
            manifest.diagnostics = Some(err.to_string());
            manifest.outputs.clear();
            err.exit_code()
        }
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(RunReport { manifest, exit_code })
}
