use std::fmt::Write as _;
use std::fs;

use anyhow::Context;
use clap::Args;
use qeraser_core::analysis::{
    consistent_with_curve, erasure_result, measure_path_probabilities, phase_difference, predict_endpoints,
    scan_phases, ComplementarityPoint, EnvCondition, PathProbabilities, Prediction, Runner, SimulationRunner,
};
use qeraser_core::instrument::EomMode;
use qeraser_core::spacetime::VerificationReport;
use serde::Serialize;

use crate::analyze::{fit_all, write_fringe_csv, ErasureSummary};
use crate::exit::VerificationFailed;
use crate::manifest::{RunManifest, RunSection};
use crate::sweep::{self, ETA_I, ETA_V};
use crate::verify::{relations_csv, verify_all};
use crate::RunOptions;

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[command(flatten)]
    pub run: RunOptions,
    /// Full-width coincidence window in picoseconds.
    #[arg(long)]
    pub window_ps: Option<u64>,
    /// Skip the complementarity sweep.
    #[arg(long)]
    pub no_sweep: bool,
}

#[derive(Debug, Serialize)]
struct Results {
    experiment: String,
    seed: u64,
    expectation: Prediction,
    which_way: PathProbabilities,
    erasure_basis: PathProbabilities,
    erasure: ErasureSummary,
    sweep: Vec<ComplementarityPoint>,
    spacetime_passed: bool,
}

pub fn run(args: &ReportArgs) -> anyhow::Result<()> {
    let (mut cfg, seed, _) = args.run.resolve()?;
    if let Some(w) = args.window_ps {
        cfg.analysis.window_ps = w;
    }
    cfg.analysis.validate()?;
    let exp = cfg.experiment()?;
    let subtract = cfg.analysis.subtract_accidentals;
    let out = &args.run.out;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    let reports = verify_all(&[])?;
    fs::write(out.join("spacetime.csv"), relations_csv(&reports))?;
    let spacetime_passed = reports.iter().all(VerificationReport::passed);

    // A pulsed modulator is simply left off for the which-way runs; a
    // toggled one always switches, so those runs keep its unswitched events.
    let mut runner = SimulationRunner::new(cfg.analysis.clone(), seed);
    let toggled = exp.eom.mode == EomMode::Toggled;
    let which_way = measure_path_probabilities(&mut runner, &exp, &cfg.schedule, toggled, EnvCondition::V, subtract)?;
    let erasure_basis =
        measure_path_probabilities(&mut runner, &exp, &cfg.schedule, true, EnvCondition::R, subtract)?;
    let phases = scan_phases(&cfg.schedule);
    let scan = runner.run(&exp, &cfg.schedule.scan_plan(true))?;
    write_fringe_csv(&out.join("fringes.csv"), &scan, &phases)?;
    let mut notes = Vec::new();
    fit_all(&scan, &phases, subtract, out, &mut notes)?;
    let er = erasure_result(&scan, &phases, 1, subtract)?;
    let erasure = ErasureSummary {
        visibility_plus: er.plus.visibility,
        visibility_minus: er.minus.visibility,
        phase_difference_rad: phase_difference(&er.plus.det1, &er.minus.det1),
        pi_shifted: er.pi_shifted,
    };

    let points = if args.no_sweep || cfg.analysis.sweep_fractions.is_empty() {
        Vec::new()
    } else {
        let pts = sweep::measure(&cfg, qeraser_core::instrument::derive_seed(seed, 1 << 20), &cfg.analysis.sweep_fractions)?;
        sweep::write_outputs(out, &pts)?;
        pts
    };

    let results = Results {
        experiment: cfg.name.clone(),
        seed,
        expectation: predict_endpoints(&exp, EnvCondition::V, EnvCondition::R),
        which_way,
        erasure_basis,
        erasure,
        sweep: points,
        spacetime_passed,
    };
    fs::write(out.join("results.json"), serde_json::to_string_pretty(&results)? + "\n")?;
    let md = markdown(&results, &reports, &notes);
    fs::write(out.join("report.md"), &md)?;
    RunManifest {
        run: RunSection {
            command: "report".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            eom_enabled: true,
            parts: Vec::new(),
        },
        experiment: cfg.manifest(seed)?,
    }
    .write(out)?;
    print!("{md}");

    if spacetime_passed {
        Ok(())
    } else {
        Err(VerificationFailed("spacetime relations differ from expectations".into()).into())
    }
}

fn markdown(r: &Results, reports: &[VerificationReport], notes: &[String]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Report: {} (seed {})\n", r.experiment, r.seed);
    let _ = writeln!(s, "## Endpoints\n");
    let _ = writeln!(s, "| quantity | measured | expectation |");
    let _ = writeln!(s, "|---|---|---|");
    let w = &r.which_way;
    let _ = writeln!(s, "| P(a\\|V) | {} | {:.4} |", w.p_a, r.expectation.p_a);
    let _ = writeln!(s, "| P(b\\|V) | {} | {:.4} |", w.p_b, 1.0 - r.expectation.p_a);
    let _ = writeln!(s, "| I | {} | {:.4} |", w.welcher_weg, r.expectation.welcher_weg);
    let e = &r.erasure_basis;
    let _ = writeln!(s, "| P(a\\|R) | {} | 0.5 |", e.p_a);
    let _ = writeln!(s, "| P(b\\|R) | {} | 0.5 |", e.p_b);
    let _ = writeln!(s, "| V (R) | {} | {:.4} |", r.erasure.visibility_plus, r.expectation.visibility);
    let _ = writeln!(s, "| V (L) | {} | {:.4} |", r.erasure.visibility_minus, r.expectation.visibility);
    let _ = writeln!(s, "| Δφ(R, L) | {} rad | π |", r.erasure.phase_difference_rad);
    let _ = writeln!(s, "\nR and L fringes π-shifted within 3σ: {}\n", if r.erasure.pi_shifted { "yes" } else { "no" });

    if !r.sweep.is_empty() {
        let _ = writeln!(s, "## Complementarity sweep\n");
        let _ = writeln!(s, "| drive | basis latitude (°) | I | V | on V = {ETA_V}√(1−(I/{ETA_I})²) |");
        let _ = writeln!(s, "|---|---|---|---|---|");
        for p in &r.sweep {
            let _ = writeln!(
                s,
                "| {:.2} | {:.1} | {} | {} | {} |",
                p.drive,
                p.basis_latitude_deg,
                p.welcher_weg,
                p.visibility,
                if consistent_with_curve(p, ETA_I, ETA_V, 3.0) { "yes" } else { "no" }
            );
        }
        let _ = writeln!(s);
    }

    let _ = writeln!(s, "## Spacetime relations\n");
    let _ = writeln!(s, "| scenario | checks | result | C_e → I_s speed | C_e after I_s |");
    let _ = writeln!(s, "|---|---|---|---|---|");
    for rep in reports {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} |",
            rep.scenario,
            rep.checks.len(),
            if rep.passed() { "PASS" } else { "FAIL" },
            rep.choice_to_interference_speed.map_or("–".into(), |v| format!("{v:.2} c")),
            rep.choice_after_interference_s.map_or("–".into(), |t| format!("{:.1} µs", t * 1e6)),
        );
    }
    for n in notes {
        let _ = writeln!(s, "\nnote: {n}");
    }
    s
}
