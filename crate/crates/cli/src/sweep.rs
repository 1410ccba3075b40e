use std::fs::{self, File};
use std::io::{BufWriter, Write};

use anyhow::Context;
use clap::Args;
use qeraser_core::analysis::{
    complementarity_sweep, consistent_with_curve, write_sweep_csv, ComplementarityPoint, SimulationRunner,
};
use qeraser_core::config::ExperimentConfig;
use qeraser_core::Error;

use crate::manifest::{RunManifest, RunSection};
use crate::plots::complementarity_plot;
use crate::RunOptions;

/// Factors of the published bound curve.
pub const ETA_I: f64 = 0.97;
pub const ETA_V: f64 = 0.95;

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunOptions,
    /// Drive fractions of the quarter-wave voltage, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub fractions: Vec<f64>,
    /// Full-width coincidence window in picoseconds.
    #[arg(long)]
    pub window_ps: Option<u64>,
}

pub fn measure(cfg: &ExperimentConfig, seed: u64, fractions: &[f64]) -> anyhow::Result<Vec<ComplementarityPoint>> {
    if fractions.is_empty() {
        return Err(Error::Config("no sweep fractions (set analysis.sweep_fractions or pass --fractions)".into()).into());
    }
    let exp = cfg.experiment()?;
    let mut runner = SimulationRunner::new(cfg.analysis.clone(), seed);
    Ok(complementarity_sweep(fractions, &mut runner, &exp, &cfg.schedule, cfg.analysis.subtract_accidentals)?)
}

pub fn write_outputs(dir: &std::path::Path, points: &[ComplementarityPoint]) -> anyhow::Result<()> {
    let path = dir.join("sweep.csv");
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    write_sweep_csv(points, &mut w)?;
    w.flush()?;
    fs::write(dir.join("complementarity.svg"), complementarity_plot(points, ETA_I, ETA_V).render())?;
    Ok(())
}

pub fn run(args: &SweepArgs) -> anyhow::Result<()> {
    let (mut cfg, seed, _) = args.run.resolve()?;
    if let Some(w) = args.window_ps {
        cfg.analysis.window_ps = w;
    }
    if !args.fractions.is_empty() {
        cfg.analysis.sweep_fractions = args.fractions.clone();
    }
    cfg.analysis.validate()?;
    let points = measure(&cfg, seed, &cfg.analysis.sweep_fractions)?;
    let out = &args.run.out;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_outputs(out, &points)?;
    RunManifest {
        run: RunSection {
            command: "sweep".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            eom_enabled: true,
            parts: Vec::new(),
        },
        experiment: cfg.manifest(seed)?,
    }
    .write(out)?;

    println!("{:>6} {:>8} {:>18} {:>18}  on curve", "drive", "lat°", "I", "V");
    for p in &points {
        println!(
            "{:>6.3} {:>8.2} {:>18} {:>18}  {}",
            p.drive,
            p.basis_latitude_deg,
            p.welcher_weg.to_string(),
            p.visibility.to_string(),
            if consistent_with_curve(p, ETA_I, ETA_V, 3.0) { "yes" } else { "no" }
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}
