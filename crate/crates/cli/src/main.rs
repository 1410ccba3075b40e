//! `qeraser`: simulate, analyze and verify delayed-choice quantum eraser runs.

mod analyze;
mod exit;
mod manifest;
mod plots;
mod report;
mod simulate;
mod svg;
mod sweep;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qeraser_core::config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "qeraser", version, about = "Delayed-choice quantum eraser simulation and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate tag streams for the scan and both blocking runs.
    Simulate(simulate::SimulateArgs),
    /// Reconstruct coincidences from a simulated run and fit the results.
    Analyze(analyze::AnalyzeArgs),
    /// Sweep the modulator drive and measure (I, V) at each setting.
    Sweep(sweep::SweepArgs),
    /// Check the spacetime relations of one or more scenarios.
    VerifySpacetime(verify::VerifyArgs),
    /// Full reproduction: spacetime tables, endpoints, sweep and figures.
    Report(report::ReportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

/// Options shared by the commands that run the Monte Carlo.
#[derive(Args, Debug, Clone)]
pub struct RunOptions {
    /// Bundled experiment name, experiment TOML file, or run manifest.
    #[arg(long, default_value = "vienna-II")]
    pub config: String,
    /// Root seed; overrides the one in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Integration time per scan step, seconds.
    #[arg(long)]
    pub dwell: Option<f64>,
    /// Integration time of each blocking run, seconds.
    #[arg(long)]
    pub blocking_dwell: Option<f64>,
}

impl RunOptions {
    /// The resolved config with overrides applied, its seed, and the run
    /// section if the config was a manifest.
    pub fn resolve(&self) -> anyhow::Result<(ExperimentConfig, u64, Option<manifest::RunSection>)> {
        let (mut cfg, run) = manifest::resolve_config(&self.config)?;
        if let Some(d) = self.dwell {
            cfg.schedule.dwell_s = d;
        }
        if let Some(d) = self.blocking_dwell {
            cfg.schedule.blocking_dwell_s = d;
        }
        cfg.schedule.validate()?;
        let seed = match (self.seed, &run) {
            (Some(s), _) => s,
            (None, Some(r)) => r.seed,
            (None, None) => cfg.seed()?,
        };
        cfg.seed = Some(seed);
        Ok((cfg, seed, run))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate::run(&a),
        Command::Analyze(a) => analyze::run(&a),
        Command::Sweep(a) => sweep::run(&a),
        Command::VerifySpacetime(a) => verify::run(&a),
        Command::Report(a) => report::run(&a),
    };
    match result {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::code_for(&e))
        }
    }
}
