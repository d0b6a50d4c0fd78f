mod commands;
mod config;
mod output;
mod selfcheck;

use anyhow::Result;
use clap::{Parser, Subcommand};
use commands::Ctx;
use config::{parse_eta, Overrides, RunConfig};
use ladlag::par::Execution;
use ladlag::sensor::SensorSpec;
use log::error;
use output::{write_json, Stamp, VERSION};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ladlag", version, about = "Barrier calibration, optimal controls and value sweeps under a jump sensor")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Calibration sample count.
    #[arg(long, global = true)]
    n_samples: Option<usize>,
    /// Path count for value, toy and selfcheck estimates.
    #[arg(long, global = true)]
    n_paths: Option<usize>,
    /// Comma-separated thresholds; `optional` and `predictable` are accepted.
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_eta)]
    eta: Option<Vec<SensorSpec>>,
    /// Calibrate on the fly when no matching cache exists.
    #[arg(long, global = true)]
    calibrate: bool,
    /// Run single-threaded.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand, Clone, Copy, Debug)]
enum Cmd {
    /// Estimate constants and barrier tables, write calibration.json.
    Calibrate,
    /// Build optimal controls on one shared scenario, one CSV per sensor.
    Simulate,
    /// Value sweep over the sensor list, written to values.csv.
    Value,
    /// Bang-bang warm-up problem, written to toy.csv.
    Toy,
    /// Run the invariant suites, written to selfcheck.json.
    Selfcheck,
}

#[derive(Serialize)]
struct Diagnostic {
    command: String,
    error: String,
    causes: Vec<String>,
}

fn run(cli: &Cli) -> Result<bool> {
    let ov = Overrides {
        seed: cli.seed,
        out: cli.out.clone(),
        n_samples: cli.n_samples,
        n_paths: cli.n_paths,
        etas: cli.eta.clone(),
        calibrate: cli.calibrate,
    };
    let cfg = RunConfig::load(cli.config.as_deref(), &ov)?;
    let exec = if cli.sequential || !Execution::available() { Execution::Sequential } else { Execution::Parallel };
    let ctx = Ctx::new(cfg, exec)?;
    match cli.cmd {
        Cmd::Calibrate => {
            commands::calibrate(&ctx)?;
        }
        Cmd::Simulate => {
            commands::simulate(&ctx)?;
        }
        Cmd::Value => commands::value(&ctx)?,
        Cmd::Toy => commands::toy(&ctx)?,
        Cmd::Selfcheck => {
            let verdict = selfcheck::run(&ctx)?;
            for s in verdict.suites.iter().filter(|s| !s.passed) {
                error!("{} failed: {}", s.name, s.detail);
            }
            write_json(&ctx.path("selfcheck.json"), &ctx.stamp, &verdict)?;
            return Ok(verdict.passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            error!("{e:#}");
            let out = cli
                .out
                .clone()
                .or_else(|| RunConfig::load(cli.config.as_deref(), &Overrides::default()).ok().map(|c| c.out))
                .unwrap_or_else(|| PathBuf::from("run"));
            if std::fs::create_dir_all(&out).is_ok() {
                let stamp = Stamp { version: VERSION, config_hash: String::new(), seed: cli.seed.unwrap_or_default() };
                let diag = Diagnostic {
                    command: format!("{:?}", cli.cmd).to_lowercase(),
                    error: e.to_string(),
                    causes: e.chain().skip(1).map(|c| c.to_string()).collect(),
                };
                let _ = write_json(&out.join("error.json"), &stamp, &diag);
            }
            ExitCode::FAILURE
        }
    }
}
