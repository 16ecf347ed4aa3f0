// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use metrokit_cli::{run, ResolvedRun, RunConfig, RunOptions};

/// Runs one metrology pipeline described by a JSON configuration.
#[derive(Debug, Parser)]
#[command(name = "metrokit", version)]
struct Args {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory of the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Caps the number of concurrent evaluations.
    #[arg(long)]
    jobs: Option<usize>,
    /// Validates the configuration and prints the resolved plan.
    #[arg(long)]
    dry_run: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("METROKIT_LOG", "warn")).init();
    let args = Args::parse();
    ExitCode::from(real_main(args) as u8)
}

fn real_main(args: Args) -> i32 {
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return 2;
        }
    };
    let opts = RunOptions { seed: args.seed, out: args.out };
    let resolved = match RunConfig::from_json(&text).and_then(|c| ResolvedRun::new(c, &opts)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if args.dry_run {
        println!("{}", serde_json::to_string_pretty(&resolved.plan()).expect("plan serializes"));
        return 0;
    }
    if let Some(n) = args.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be at least 1");
            return 2;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already initialized: {e}");
        }
    }
    log::info!("running {} with seed {}", resolved.config.command.name(), resolved.config.seed);
    match run(&resolved, args.jobs) {
        Ok(report) => {
            if let Some(d) = &report.manifest.diagnostics {
                eprintln!("error: {d}");
            }
            report.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
