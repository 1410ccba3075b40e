use std::fs;

use anyhow::Context;
use clap::Args;
use qeraser_core::instrument::{derive_seed, simulate_run};
use qeraser_core::timetag::write_stream;

use crate::manifest::{Part, RunManifest, RunSection};
use crate::{RunOptions, Toggle};

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub run: RunOptions,
    /// Drive the modulator from the QRNG, or hold it at 0 V.
    #[arg(long, value_enum)]
    pub eom: Option<Toggle>,
    /// Which runs to simulate (default: all three).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub parts: Vec<PartArg>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum PartArg {
    Scan,
    AOpen,
    BOpen,
}

impl From<PartArg> for Part {
    fn from(p: PartArg) -> Self {
        match p {
            PartArg::Scan => Part::Scan,
            PartArg::AOpen => Part::AOpen,
            PartArg::BOpen => Part::BOpen,
        }
    }
}

pub fn run(args: &SimulateArgs) -> anyhow::Result<()> {
    let (cfg, seed, prior) = args.run.resolve()?;
    let eom_enabled = match (args.eom, &prior) {
        (Some(t), _) => t == Toggle::On,
        (None, Some(r)) => r.eom_enabled,
        (None, None) => true,
    };
    let parts: Vec<Part> = if !args.parts.is_empty() {
        args.parts.iter().map(|&p| p.into()).collect()
    } else if let Some(r) = &prior {
        r.parts.clone()
    } else {
        Part::ALL.to_vec()
    };
    let exp = cfg.experiment()?;
    let out = &args.run.out;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    println!("experiment {} (seed {seed}, EOM {})", cfg.name, if eom_enabled { "on" } else { "off" });
    for &part in &parts {
        let plan = part.plan(&cfg, eom_enabled);
        let run = simulate_run(&exp, &plan, derive_seed(seed, part.index()))?;
        write_stream(&run.system, out.join(part.system_file()))?;
        write_stream(&run.environment, out.join(part.environment_file()))?;
        let s = &run.stats;
        // Relative to every emitted pair, not only those with a detection.
        let emitted = exp.source.pair_rate_hz() * plan.duration_s();
        let db = |n: u64| if n > 0 { 10.0 * (n as f64 / emitted).log10() } else { f64::NEG_INFINITY };
        println!(
            "  {:<7} {:>9.3} s  emitted pairs {:.0}  system tags {}  environment tags {} ({:.1} dB of pairs)  both detected {} ({:.1} dB)",
            part.name(),
            plan.duration_s(),
            emitted,
            run.system.len(),
            run.environment.len(),
            db(run.environment.len() as u64 - s.environment_darks),
            s.both_detected,
            db(s.both_detected),
        );
    }
    let manifest = RunManifest {
        run: RunSection {
            command: "simulate".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            eom_enabled,
            parts,
        },
        experiment: cfg.manifest(seed)?,
    };
    manifest.write(out)?;
    println!("wrote {}", out.display());
    Ok(())
}
