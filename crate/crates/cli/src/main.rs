//! `riesz run <config>`: batch runs of the fractional Dirichlet solvers.

mod config;
mod error;
mod inputs;
mod pipeline;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use error::CliError;
use pipeline::RunSummary;

/// Environment variable holding the worker thread count.
const THREADS_VAR: &str = "RIESZ_THREADS";

#[derive(Parser)]
#[command(name = "riesz", version, about = "Fractional Dirichlet problems via Riesz potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline described by a TOML config file.
    Run { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run { config } = cli.command;
    match execute(&config) {
        Ok(summary) if summary.passed() => ExitCode::SUCCESS,
        Ok(summary) => {
            for c in summary.checks.iter().filter(|c| !c.passed) {
                eprintln!("error: {}", CliError::Check(format!("{}: {}", c.name, c.detail)));
            }
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(path: &Path) -> Result<RunSummary, CliError> {
    configure_threads()?;
    let cfg = RunConfig::load(path)?;
    let summary = pipeline::run(&cfg)?;
    write_manifest(&cfg, &summary)?;
    for c in &summary.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(summary)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Validation(format!("{THREADS_VAR} must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(format!("cannot configure {n} threads: {e}")))
}

fn write_manifest(cfg: &RunConfig, summary: &RunSummary) -> Result<(), CliError> {
    let mut run = toml::Table::new();
    run.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    run.insert("threads".into(), (rayon::current_num_threads() as i64).into());
    run.insert("passed".into(), summary.passed().into());
    run.insert(
        "outputs".into(),
        toml::Value::Array(summary.outputs.iter().map(|o| o.as_str().into()).collect()),
    );

    let mut timings = toml::Table::new();
    for (phase, secs) in &summary.timings {
        timings.insert(phase.clone(), (*secs).into());
    }
    let mut checks = toml::Table::new();
    for c in &summary.checks {
        let mut t = toml::Table::new();
        t.insert("passed".into(), c.passed.into());
        t.insert("detail".into(), c.detail.as_str().into());
        checks.insert(c.name.clone(), t.into());
    }
    let config: toml::Table = toml::Table::try_from(cfg).expect("config serializes");

    let mut doc = toml::Table::new();
    doc.insert("run".into(), run.into());
    doc.insert("config".into(), config.into());
    doc.insert("timings".into(), timings.into());
    doc.insert("checks".into(), checks.into());
    let path = cfg.output.join("manifest.toml");
    std::fs::write(&path, toml::to_string(&doc).expect("manifest serializes")).map_err(|e| CliError::io(&path, e))
}
