//! Noise-free expectations for the measured quantities.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::tally::EnvCondition;
use crate::instrument::{EomMode, Experiment};
use crate::quantum::{
    conditional_fringes, joint_probabilities, Blocked, EnvOutcome, InterferometerConfig, MeasurementChain,
    SystemOutcome,
};

/// Modulator drive acting on photons whose tags carry `eom_bit`.
pub fn condition_drive(exp: &Experiment, eom_bit: u8) -> f64 {
    let amp = exp.eom.drive_amplitude;
    match (exp.eom.mode, eom_bit) {
        (_, 1) => amp,
        (EomMode::PulsedOn, _) => 0.0,
        (EomMode::Toggled, _) => -amp,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub p_a: f64,
    pub welcher_weg: f64,
    pub visibility: f64,
}

fn blocked_counts(exp: &Experiment, chain: &MeasurementChain, blocked: Blocked, port: EnvOutcome) -> f64 {
    let t = joint_probabilities(&exp.state, &InterferometerConfig::blocked(blocked), chain);
    t.get(SystemOutcome::Det1, port) + t.get(SystemOutcome::Det2, port)
}

/// What accidental-free blocking runs conditioned on `which_way` and a
/// phase scan conditioned on `erasure` converge to.
pub fn predict_endpoints(exp: &Experiment, which_way: EnvCondition, erasure: EnvCondition) -> Prediction {
    let chain = exp.chain.with_drive(condition_drive(exp, which_way.eom_bit));
    let n_a = blocked_counts(exp, &chain, Blocked::PathB, which_way.port);
    let n_b = blocked_counts(exp, &chain, Blocked::PathA, which_way.port);
    let p_a = n_a / (n_a + n_b);

    let chain = exp.chain.with_drive(condition_drive(exp, erasure.eom_bit));
    let phases: Vec<f64> = (0..720).map(|k| TAU * k as f64 / 720.0).collect();
    let fr = conditional_fringes(&exp.state, &chain, &phases);
    let curve = if erasure.port == EnvOutcome::Plus { fr.plus } else { fr.minus };
    let max = curve.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = curve.iter().copied().fold(f64::INFINITY, f64::min);
    Prediction { p_a, welcher_weg: (2.0 * p_a - 1.0).abs(), visibility: (max - min) / (max + min) }
}
