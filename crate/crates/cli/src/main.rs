//! `duality` — command-line front end for the Mach-Zehnder duality
//! simulator. Every command reads a TOML scenario, applies `--set`
//! overrides, and writes a CSV table with a `#` metadata header; identical
//! inputs produce byte-identical output.

mod commands;
mod config;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "duality",
    version,
    about = "Polarization-marked Mach-Zehnder interferometer: duality scans, quantum-eraser curves, and simulated counting experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Scenario configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Master seed for count simulation; overrides noise.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a config value by path, e.g. --set marker.angle_deg=22.5.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Visibility and knowledge versus marker angle (fixed and optimal bases).
    DualityScan(CommonArgs),
    /// Duality sum and the purity law over a purity or marker-angle sweep.
    MixedScan(CommonArgs),
    /// Conditional visibility and fringe phase over linear analyzer angles.
    EraserScan(CommonArgs),
    /// Zero/unit-visibility points and great circle on the Poincaré sphere.
    Poincare(CommonArgs),
    /// Simulated photon-counting experiment with estimator errors.
    Montecarlo(CommonArgs),
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let (args, produce): (&CommonArgs, fn(&config::Scenario) -> Result<table::OutputTable>) =
        match &cli.command {
            Command::DualityScan(a) => (a, commands::duality_scan),
            Command::MixedScan(a) => (a, commands::mixed_scan),
            Command::EraserScan(a) => (a, commands::eraser_scan),
            Command::Poincare(a) => (a, commands::poincare),
            Command::Montecarlo(a) => (a, commands::montecarlo),
        };
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("cannot read config {}", args.config.display()))?;
    let scenario = config::resolve(&text, &args.overrides, args.seed)?;
    let table = produce(&scenario)?;
    let rendered = table.render();
    match &args.out {
        Some(path) => std::fs::write(path, rendered)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{rendered}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
