use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use qeraser_core::analysis::{
    erasure_result, fringe_visibility, path_probabilities, phase_difference, predict_endpoints, EnvCondition, Estimate,
    FringeScan, PathProbabilities, Tally, VisibilityMeasurement,
};
use qeraser_core::config::ExperimentConfig;
use qeraser_core::instrument::Experiment;
use qeraser_core::quantum::EnvOutcome;
use qeraser_core::timetag::{estimate_clock_offset_near, find_coincidences, read_stream};
use serde::Serialize;

use crate::manifest::{Part, RunManifest};
use crate::plots::fringe_plot;

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Directory written by `simulate`.
    pub run_dir: PathBuf,
    /// Output directory (defaults to the run directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Full-width coincidence window in picoseconds.
    #[arg(long)]
    pub window_ps: Option<u64>,
    /// Subtract singles-based accidental estimates (also set by the config).
    #[arg(long)]
    pub subtract_accidentals: bool,
}

pub const CONDITIONS: [EnvCondition; 4] = [EnvCondition::H, EnvCondition::V, EnvCondition::R, EnvCondition::L];

#[derive(Debug, Serialize)]
pub struct PartSummary {
    pub part: Part,
    pub system_tags: usize,
    pub environment_tags: usize,
    /// `t_sys − t_env` of correlated detections.
    pub offset_s: f64,
    pub offset_sigma_s: f64,
    pub coincidences: usize,
}

#[derive(Debug, Serialize)]
pub struct ErasureSummary {
    pub visibility_plus: Estimate,
    pub visibility_minus: Estimate,
    pub phase_difference_rad: Estimate,
    pub pi_shifted: bool,
}

#[derive(Debug, Serialize)]
pub struct AnalysisReport {
    pub experiment: String,
    pub window_ps: u64,
    pub accidentals_subtracted: bool,
    pub parts: Vec<PartSummary>,
    pub probabilities: Vec<PathProbabilities>,
    pub fringes: Vec<VisibilityMeasurement>,
    pub erasure: Option<ErasureSummary>,
    pub notes: Vec<String>,
}

fn dwell_map(part: Part, cfg: &ExperimentConfig, eom: bool) -> BTreeMap<u32, f64> {
    part.plan(cfg, eom).steps.iter().map(|s| (s.step, s.dwell_s)).collect()
}

/// Offset recovery, matching and tallying for one simulated run.
fn reconstruct_part(
    dir: &Path,
    out: &Path,
    part: Part,
    cfg: &ExperimentConfig,
    exp: &Experiment,
    eom: bool,
) -> anyhow::Result<(PartSummary, Tally)> {
    let sys = read_stream(dir.join(part.system_file()))?;
    let env = read_stream(dir.join(part.environment_file()))?;
    let (d_sys, d_env) = exp.detection_delays()?;
    let a = &cfg.analysis;
    let est = estimate_clock_offset_near(sys.tags(), env.tags(), d_sys - d_env, a.offset_span_s, a.offset_bin_s)
        .with_context(|| format!("{}: clock offset recovery", part.name()))?;
    let set = find_coincidences(&sys, &env, a.window_ps as f64 * 1e-12, est.offset_s)?;
    let path = out.join(format!("coincidences_{}.csv", part.name()));
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    set.write_csv(&sys, &env, &mut w)?;
    w.flush()?;
    let tally = Tally::from_coincidences(&sys, &env, &set, &dwell_map(part, cfg, eom))?;
    let summary = PartSummary {
        part,
        system_tags: sys.len(),
        environment_tags: env.len(),
        offset_s: est.offset_s,
        offset_sigma_s: est.uncertainty_s,
        coincidences: set.len(),
    };
    Ok((summary, tally))
}

pub fn write_fringe_csv(path: &Path, tally: &Tally, phases: &BTreeMap<u32, f64>) -> anyhow::Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(w, "condition,eom_bit,step,phase_rad,dwell_s,det1,det2,accidentals_det1,accidentals_det2")?;
    for eom_bit in 0..2u8 {
        let scan = FringeScan::from_tally(tally, eom_bit, phases)?;
        for port in EnvOutcome::ALL {
            let name = EnvCondition { eom_bit, port }.name();
            let e = port.index();
            for p in &scan.points {
                writeln!(
                    w,
                    "{name},{eom_bit},{},{},{},{},{},{},{}",
                    p.step, p.phase, p.dwell_s, p.counts[0][e], p.counts[1][e], p.accidentals[0][e], p.accidentals[1][e]
                )?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Fits every condition of a scan, writing a figure for each one that fits.
pub fn fit_all(
    tally: &Tally,
    phases: &BTreeMap<u32, f64>,
    subtract: bool,
    out: &Path,
    notes: &mut Vec<String>,
) -> anyhow::Result<Vec<VisibilityMeasurement>> {
    let mut fringes = Vec::new();
    for cond in CONDITIONS {
        match fringe_visibility(tally, phases, cond, subtract) {
            Ok(m) => {
                let mut scan = FringeScan::from_tally(tally, cond.eom_bit, phases)?;
                if subtract {
                    scan = qeraser_core::analysis::subtract_estimated_accidentals(&scan);
                }
                let path = out.join(format!("fringe_{}.svg", cond.name()));
                fs::write(&path, fringe_plot(&scan, &m).render())?;
                fringes.push(m);
            }
            Err(e) => notes.push(format!("fringe {}: {e}", cond.name())),
        }
    }
    Ok(fringes)
}

pub fn run(args: &AnalyzeArgs) -> anyhow::Result<()> {
    let manifest = RunManifest::read(&args.run_dir)?;
    let mut cfg = manifest.experiment;
    if let Some(w) = args.window_ps {
        cfg.analysis.window_ps = w;
    }
    cfg.analysis.validate()?;
    let subtract = args.subtract_accidentals || cfg.analysis.subtract_accidentals;
    let exp = cfg.experiment()?;
    let eom = manifest.run.eom_enabled;
    let out = args.out.clone().unwrap_or_else(|| args.run_dir.clone());
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;

    let mut parts = Vec::new();
    let mut tallies = BTreeMap::new();
    for &part in &manifest.run.parts {
        let (summary, tally) = reconstruct_part(&args.run_dir, &out, part, &cfg, &exp, eom)?;
        parts.push(summary);
        tallies.insert(part.name(), tally);
    }

    let mut notes = Vec::new();
    let mut probabilities = Vec::new();
    if let (Some(a), Some(b)) = (tallies.get(Part::AOpen.name()), tallies.get(Part::BOpen.name())) {
        for cond in CONDITIONS {
            match path_probabilities(a, b, cond, subtract) {
                Ok(p) => probabilities.push(p),
                Err(e) => notes.push(format!("blocking {}: {e}", cond.name())),
            }
        }
    }

    let mut fringes = Vec::new();
    let mut erasure = None;
    if let Some(scan) = tallies.get(Part::Scan.name()) {
        let phases = qeraser_core::analysis::scan_phases(&cfg.schedule);
        write_fringe_csv(&out.join("fringes.csv"), scan, &phases)?;
        fringes = fit_all(scan, &phases, subtract, &out, &mut notes)?;
        if eom {
            match erasure_result(scan, &phases, 1, subtract) {
                Ok(r) => {
                    erasure = Some(ErasureSummary {
                        visibility_plus: r.plus.visibility,
                        visibility_minus: r.minus.visibility,
                        phase_difference_rad: phase_difference(&r.plus.det1, &r.minus.det1),
                        pi_shifted: r.pi_shifted,
                    })
                }
                Err(e) => notes.push(format!("erasure: {e}")),
            }
        }
    }

    let report = AnalysisReport {
        experiment: cfg.name.clone(),
        window_ps: cfg.analysis.window_ps,
        accidentals_subtracted: subtract,
        parts,
        probabilities,
        fringes,
        erasure,
        notes,
    };
    fs::write(out.join("analysis.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    print_summary(&report, &exp);
    Ok(())
}

fn print_summary(r: &AnalysisReport, exp: &Experiment) {
    println!("experiment {}  window {} ps  accidentals {}", r.experiment, r.window_ps, if r.accidentals_subtracted { "subtracted" } else { "kept" });
    for p in &r.parts {
        println!(
            "  {:<7} sys {:>9}  env {:>8}  offset {:+.3} ns ± {:.3}  coincidences {}",
            p.part.name(),
            p.system_tags,
            p.environment_tags,
            p.offset_s * 1e9,
            p.offset_sigma_s * 1e9,
            p.coincidences
        );
    }
    for p in &r.probabilities {
        let c = p.condition.name();
        println!("  P(a|{c}) = {}  P(b|{c}) = {}  I = {}  (n = {} + {})", p.p_a, p.p_b, p.welcher_weg, p.n_a, p.n_b);
    }
    for m in &r.fringes {
        println!(
            "  fringe {}: V(Det1) = {}  V(Det2) = {}  mean {}",
            m.condition.name(),
            m.det1.visibility,
            m.det2.visibility,
            m.visibility
        );
    }
    if let Some(e) = &r.erasure {
        println!(
            "  erasure: V+ = {}  V− = {}  Δφ = {} rad  π-shifted: {}",
            e.visibility_plus, e.visibility_minus, e.phase_difference_rad, e.pi_shifted
        );
    }
    let pred = predict_endpoints(exp, EnvCondition::V, EnvCondition::R);
    println!("  expectation: I = {:.4}, V = {:.4}", pred.welcher_weg, pred.visibility);
    for n in &r.notes {
        println!("  note: {n}");
    }
}
