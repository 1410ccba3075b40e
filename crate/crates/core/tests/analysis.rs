use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use qeraser_core::analysis::{
    bound_curve, complementarity_sweep, condition_drive, fit_fringe, measure_path_probabilities,
    predict_endpoints, probabilities_from_counts, subtract_background, EnvCondition, FringePoint, FringeScan, Runner,
    SimulationRunner, StepTally, Tally,
};
use qeraser_core::config::{ExperimentConfig, ScheduleConfig};
use qeraser_core::instrument::{Experiment, RunPlan};
use qeraser_core::quantum::{joint_probabilities, EnvOutcome, InterferometerConfig, SystemOutcome};
use qeraser_core::Result;

/// Fills tallies with scaled expectation values instead of sampled counts.
struct ExpectationRunner {
    pairs_per_step: f64,
}

impl Runner for ExpectationRunner {
    fn run(&mut self, exp: &Experiment, plan: &RunPlan) -> Result<Tally> {
        let mut tally = Tally { window_s: 1e-9, duration_s: plan.duration_s(), ..Tally::default() };
        let bits: &[u8] = if plan.eom_enabled { &[0, 1] } else { &[0] };
        for st in &plan.steps {
            let mut step = StepTally { dwell_s: st.dwell_s, ..StepTally::default() };
            for &bit in bits {
                let drive = if plan.eom_enabled { condition_drive(exp, bit) } else { 0.0 };
                let ifm = InterferometerConfig { phase: st.phase, blocked: plan.blocked };
                let t = joint_probabilities(&exp.state, &ifm, &exp.chain.with_drive(drive));
                for (d, s) in [SystemOutcome::Det1, SystemOutcome::Det2].into_iter().enumerate() {
                    for e in EnvOutcome::ALL {
                        step.coincidences[bit as usize][d][e.index()] = (t.get(s, e) * self.pairs_per_step).round() as u64;
                    }
                }
            }
            tally.steps.insert(st.step, step);
        }
        Ok(tally)
    }
}

fn vienna() -> (ExperimentConfig, Experiment) {
    let cfg = ExperimentConfig::bundled("vienna-II").unwrap();
    let exp = cfg.experiment().unwrap();
    (cfg, exp)
}

#[test]
fn blocking_pipeline_reproduces_exact_expectation() {
    let (cfg, exp) = vienna();
    let mut runner = ExpectationRunner { pairs_per_step: 1e12 };
    for (eom, cond) in [(false, EnvCondition::V), (true, EnvCondition::R), (true, EnvCondition::L)] {
        let p = measure_path_probabilities(&mut runner, &exp, &cfg.schedule, eom, cond, false).unwrap();
        let want = predict_endpoints(&exp, cond, EnvCondition::R);
        assert!((p.p_a.value - want.p_a).abs() < 1e-9, "{cond:?}: {} vs {}", p.p_a, want.p_a);
        assert!((p.p_a.value + p.p_b.value - 1.0).abs() < 1e-12);
    }
}

#[test]
fn ideal_sweep_lies_on_unit_circle() {
    let cfg = ExperimentConfig::bundled("vienna-ideal").unwrap();
    let exp = cfg.experiment().unwrap();
    let mut runner = ExpectationRunner { pairs_per_step: 1e12 };
    let points =
        complementarity_sweep(&cfg.analysis.sweep_fractions, &mut runner, &exp, &cfg.schedule, false).unwrap();
    assert!(points.len() >= 8);
    for p in &points {
        let r2 = p.radius_squared().value;
        assert!((r2 - 1.0).abs() < 1e-6, "drive {}: I²+V² = {r2}", p.drive);
    }
    assert!(points.windows(2).all(|w| w[1].basis_latitude_deg >= w[0].basis_latitude_deg));
}

#[test]
fn imperfect_sweep_stays_under_bound() {
    let (cfg, exp) = vienna();
    let mut runner = ExpectationRunner { pairs_per_step: 1e9 };
    let points =
        complementarity_sweep(&cfg.analysis.sweep_fractions, &mut runner, &exp, &cfg.schedule, false).unwrap();
    for p in &points {
        assert!(p.radius_squared().value < 1.0);
        // The published factors are rounded, so allow for that.
        let bound = bound_curve(p.welcher_weg.value, 0.97, 0.95);
        assert!(p.visibility.value <= bound + 2e-3, "{p:?} above {bound}");
    }
}

fn synthetic_scan(offset: f64, visibility: f64, phase0: f64, background: f64) -> FringeScan {
    let points = (0..24)
        .map(|k| {
            let phi = TAU * k as f64 / 24.0;
            let signal = offset * (1.0 + visibility * (phi - phase0).cos());
            let anti = offset * (1.0 - visibility * (phi - phase0).cos());
            FringePoint {
                step: k,
                phase: phi,
                dwell_s: 1.0,
                counts: [[signal + background, anti + background], [anti + background, signal + background]],
                subtracted: [[0.0; 2]; 2],
                accidentals: [[background; 2]; 2],
            }
        })
        .collect();
    FringeScan { eom_bit: 1, points, background_subtracted: false }
}

#[test]
fn fit_recovers_noise_free_sinusoid() {
    let scan = synthetic_scan(1000.0, 0.8, 0.7, 0.0);
    let fit = fit_fringe(&scan, 0, EnvOutcome::Plus).unwrap();
    assert!((fit.visibility.value - 0.8).abs() < 1e-9);
    assert!((fit.phase0.value - 0.7).abs() < 1e-9);
    let anti = fit_fringe(&scan, 0, EnvOutcome::Minus).unwrap();
    let d = (fit.phase0.value - anti.phase0.value).rem_euclid(TAU);
    assert!((d - PI).abs() < 1e-9);
}

#[test]
fn background_subtraction_restores_visibility() {
    let (o, v, b) = (400.0, 0.9, 250.0);
    let scan = synthetic_scan(o, v, 0.0, b);
    let raw = fit_fringe(&scan, 1, EnvOutcome::Minus).unwrap();
    // A flat background dilutes V by O/(O + b).
    assert!((raw.visibility.value - v * o / (o + b)).abs() < 1e-9);
    let clean = subtract_background(&scan, b, 1.0);
    let fit = fit_fringe(&clean, 1, EnvOutcome::Minus).unwrap();
    assert!((fit.visibility.value - v).abs() < 1e-9);
    // Subtraction keeps the raw Poisson variance, so the error grows.
    assert!(fit.visibility.sigma > raw.visibility.sigma);
}

#[test]
fn counts_to_probabilities() {
    let [a, b] = probabilities_from_counts([22, 978]).unwrap();
    assert!((a.value - 0.022).abs() < 1e-12 && (b.value - 0.978).abs() < 1e-12);
    assert!(probabilities_from_counts([0, 0]).is_err());
}

fn spread(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[test]
fn welcher_weg_error_scales_as_inverse_root_dwell() {
    let (cfg, exp) = vienna();
    let want = predict_endpoints(&exp, EnvCondition::V, EnvCondition::R).welcher_weg;
    let mut stds = Vec::new();
    for dwell in [0.5, 2.0] {
        let sched = ScheduleConfig { blocking_dwell_s: dwell, ..cfg.schedule };
        let mut values = Vec::new();
        let mut reported = Vec::new();
        for seed in 0..20 {
            let mut r = SimulationRunner::new(cfg.analysis.clone(), 1000 + seed);
            let p = measure_path_probabilities(&mut r, &exp, &sched, false, EnvCondition::V, false).unwrap();
            values.push(p.welcher_weg.value);
            reported.push(p.welcher_weg.sigma);
        }
        let (mean, sd) = spread(&values);
        let (sigma, _) = spread(&reported);
        assert!((mean - want).abs() < 4.0 * sd / 20f64.sqrt(), "dwell {dwell}: mean {mean} vs {want}");
        assert!((0.6..1.6).contains(&(sd / sigma)), "dwell {dwell}: scatter {sd} vs reported {sigma}");
        stds.push(sd);
    }
    let ratio = stds[0] / stds[1];
    assert!((1.3..3.0).contains(&ratio), "σ ratio {ratio} for 4× dwell");
}

#[test]
fn tally_merge_adds_counts() {
    let (cfg, exp) = vienna();
    let mut runner = ExpectationRunner { pairs_per_step: 1000.0 };
    let plan = cfg.schedule.scan_plan(true);
    let a = runner.run(&exp, &plan).unwrap();
    let mut b = a.clone();
    b.merge(&a);
    assert_eq!(b.total_coincidences(), 2 * a.total_coincidences());
    let phases: BTreeMap<u32, f64> = plan.steps.iter().map(|s| (s.step, s.phase)).collect();
    assert_eq!(FringeScan::from_tally(&b, 1, &phases).unwrap().points.len(), plan.steps.len());
}
