use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::fit::{fit_fringe, pi_shifted, subtract_estimated_accidentals, FringeFit, FringeScan};
use super::probabilities::{path_probabilities, PathProbabilities};
use super::tally::{EnvCondition, Estimate, Tally};
use crate::config::{AnalysisConfig, ScheduleConfig};
use crate::error::{Error, Result};
use crate::instrument::{derive_seed, simulate_run, Experiment, RunPlan, ScheduleStep};
use crate::quantum::{Blocked, EnvOutcome, HybridState};
use crate::timetag::{estimate_clock_offset_near, find_coincidences, TimeTagStream};

/// Something that turns a run plan into coincidence counts.
pub trait Runner {
    fn run(&mut self, exp: &Experiment, plan: &RunPlan) -> Result<Tally>;
}

/// Matches one pair of streams: recovers the clock offset around the
/// geometric expectation, then counts coincidences.
pub fn reconstruct(
    exp: &Experiment,
    system: &TimeTagStream,
    environment: &TimeTagStream,
    settings: &AnalysisConfig,
    dwell: &BTreeMap<u32, f64>,
) -> Result<Tally> {
    let (d_sys, d_env) = exp.detection_delays()?;
    let est = estimate_clock_offset_near(
        system.tags(),
        environment.tags(),
        d_sys - d_env,
        settings.offset_span_s,
        settings.offset_bin_s,
    )?;
    let set = find_coincidences(system, environment, settings.window_ps as f64 * 1e-12, est.offset_s)?;
    Tally::from_coincidences(system, environment, &set, dwell)
}

/// Runs the Monte Carlo in chunks of at most `chunk_s`, each with its own
/// derived seed, and reconstructs every chunk independently.
#[derive(Debug, Clone)]
pub struct SimulationRunner {
    pub settings: AnalysisConfig,
    seed: u64,
    runs: u64,
}

impl SimulationRunner {
    pub fn new(settings: AnalysisConfig, seed: u64) -> Self {
        Self { settings, seed, runs: 0 }
    }

    /// Number of simulate_run calls so far.
    pub fn runs(&self) -> u64 {
        self.runs
    }
}

impl Runner for SimulationRunner {
    fn run(&mut self, exp: &Experiment, plan: &RunPlan) -> Result<Tally> {
        plan.validate()?;
        let mut total = Tally::default();
        for st in &plan.steps {
            let pieces = (st.dwell_s / self.settings.chunk_s).ceil().max(1.0) as usize;
            let dwell_s = st.dwell_s / pieces as f64;
            for _ in 0..pieces {
                let piece = RunPlan {
                    steps: vec![ScheduleStep { dwell_s, ..*st }],
                    blocked: plan.blocked,
                    eom_enabled: plan.eom_enabled,
                    record_truth: false,
                };
                let out = simulate_run(exp, &piece, derive_seed(self.seed, self.runs))?;
                self.runs += 1;
                let dwell = BTreeMap::from([(st.step, dwell_s)]);
                total.merge(&reconstruct(exp, &out.system, &out.environment, &self.settings, &dwell)?);
            }
        }
        Ok(total)
    }
}

/// The two blocking runs, conditioned on `cond`.
pub fn measure_path_probabilities<R: Runner + ?Sized>(
    runner: &mut R,
    exp: &Experiment,
    schedule: &ScheduleConfig,
    eom_enabled: bool,
    cond: EnvCondition,
    subtract_accidentals: bool,
) -> Result<PathProbabilities> {
    let a_open = runner.run(exp, &schedule.blocking_plan(Blocked::PathB, eom_enabled))?;
    let b_open = runner.run(exp, &schedule.blocking_plan(Blocked::PathA, eom_enabled))?;
    path_probabilities(&a_open, &b_open, cond, subtract_accidentals)
}

/// Fringes of both system detectors for one environment outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityMeasurement {
    pub condition: EnvCondition,
    pub det1: FringeFit,
    pub det2: FringeFit,
    /// Mean of the two detectors' visibilities.
    pub visibility: Estimate,
    pub background_subtracted: bool,
}

pub fn scan_phases(schedule: &ScheduleConfig) -> BTreeMap<u32, f64> {
    (0..schedule.steps).map(|k| (k, schedule.phase(k))).collect()
}

/// Fits Det1 and Det2 fringes conditioned on `cond`.
pub fn fringe_visibility(
    tally: &Tally,
    phases: &BTreeMap<u32, f64>,
    cond: EnvCondition,
    subtract_accidentals: bool,
) -> Result<VisibilityMeasurement> {
    let mut scan = FringeScan::from_tally(tally, cond.eom_bit, phases)?;
    if subtract_accidentals {
        scan = subtract_estimated_accidentals(&scan);
    }
    let det1 = fit_fringe(&scan, 0, cond.port)?;
    let det2 = fit_fringe(&scan, 1, cond.port)?;
    let visibility = Estimate::new(
        0.5 * (det1.visibility.value + det2.visibility.value),
        0.5 * det1.visibility.sigma.hypot(det2.visibility.sigma),
    );
    Ok(VisibilityMeasurement { condition: cond, det1, det2, visibility, background_subtracted: subtract_accidentals })
}

/// Erasure-basis outcome: both ports' fringes from one scan, and whether
/// they are mutually π-shifted within 3σ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErasureResult {
    pub plus: VisibilityMeasurement,
    pub minus: VisibilityMeasurement,
    pub pi_shifted: bool,
}

pub fn erasure_result(
    tally: &Tally,
    phases: &BTreeMap<u32, f64>,
    eom_bit: u8,
    subtract_accidentals: bool,
) -> Result<ErasureResult> {
    let plus = fringe_visibility(tally, phases, EnvCondition { eom_bit, port: EnvOutcome::Plus }, subtract_accidentals)?;
    let minus = fringe_visibility(tally, phases, EnvCondition { eom_bit, port: EnvOutcome::Minus }, subtract_accidentals)?;
    let pi = pi_shifted(&plus.det1, &minus.det1, 3.0);
    Ok(ErasureResult { plus, minus, pi_shifted: pi })
}

/// Rescales the state visibilities so that measured `(I, V)` would have
/// come out as `target`. Used to fix the as-operated state on one scenario
/// and carry it unchanged to the others.
pub fn calibrate_state(state: &HybridState, measured: (f64, f64), target: (f64, f64)) -> Result<HybridState> {
    if !(measured.0 > 0.0 && measured.1 > 0.0) {
        return Err(Error::InsufficientData(format!("cannot calibrate on measured (I, V) = {measured:?}")));
    }
    HybridState::new(state.v_hv() * target.0 / measured.0, state.v_coh() * target.1 / measured.1)
}
