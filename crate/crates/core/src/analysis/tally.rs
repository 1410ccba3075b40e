use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::EnvOutcome;
use crate::timetag::{Channel, CoincidenceSet, TimeTag, TimeTagStream};

/// A value with its one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub sigma: f64,
}

impl Estimate {
    pub fn new(value: f64, sigma: f64) -> Self {
        Self { value, sigma }
    }

    /// `|self − target| ≤ n·σ`.
    pub fn within_sigmas(&self, target: f64, n: f64) -> bool {
        (self.value - target).abs() <= n * self.sigma
    }
}

impl std::fmt::Display for Estimate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.4} ± {:.4}", self.value, self.sigma)
    }
}

/// Environment-side selection: modulator status and analyzer port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnvCondition {
    pub eom_bit: u8,
    pub port: EnvOutcome,
}

impl EnvCondition {
    /// Modulator idle, transmitted port.
    pub const H: Self = Self { eom_bit: 0, port: EnvOutcome::Plus };
    pub const V: Self = Self { eom_bit: 0, port: EnvOutcome::Minus };
    /// Modulator switched, transmitted port.
    pub const R: Self = Self { eom_bit: 1, port: EnvOutcome::Plus };
    pub const L: Self = Self { eom_bit: 1, port: EnvOutcome::Minus };

    pub fn name(&self) -> String {
        match (self.eom_bit, self.port) {
            (0, EnvOutcome::Plus) => "H".into(),
            (0, EnvOutcome::Minus) => "V".into(),
            (1, EnvOutcome::Plus) => "R".into(),
            (1, EnvOutcome::Minus) => "L".into(),
            (b, p) => format!("eom{b}-{p:?}"),
        }
    }
}

pub(crate) fn sys_index(ch: Channel) -> Option<usize> {
    match ch {
        Channel::Det1 => Some(0),
        Channel::Det2 => Some(1),
        _ => None,
    }
}

pub(crate) fn port_index(ch: Channel) -> Option<usize> {
    match ch {
        Channel::Det3 => Some(EnvOutcome::Plus.index()),
        Channel::Det4 => Some(EnvOutcome::Minus.index()),
        _ => None,
    }
}

/// Counts gathered at one scanner step.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepTally {
    pub dwell_s: f64,
    /// Indexed `[eom_bit][system detector][environment port]`.
    pub coincidences: [[[u64; 2]; 2]; 2],
    pub system_singles: [u64; 2],
    /// Coincidences whose environment photon arrived while the modulator
    /// was settling.
    pub unflagged: u64,
}

impl StepTally {
    pub fn conditioned(&self, cond: EnvCondition) -> [u64; 2] {
        let c = &self.coincidences[cond.eom_bit as usize];
        let p = cond.port.index();
        [c[0][p], c[1][p]]
    }

    fn merge(&mut self, other: &StepTally) {
        self.dwell_s += other.dwell_s;
        for e in 0..2 {
            for s in 0..2 {
                for p in 0..2 {
                    self.coincidences[e][s][p] += other.coincidences[e][s][p];
                }
            }
        }
        for s in 0..2 {
            self.system_singles[s] += other.system_singles[s];
        }
        self.unflagged += other.unflagged;
    }
}

/// Coincidence and singles counts of a run, per scanner step.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub window_s: f64,
    pub duration_s: f64,
    pub steps: BTreeMap<u32, StepTally>,
    /// Environment singles `[eom_bit][port]` over the whole run.
    pub environment_singles: [[u64; 2]; 2],
}

impl Tally {
    /// Counts from coincidences built as `find_coincidences(system, environment, …)`.
    /// `dwell` gives the integration time of each scanner step.
    pub fn from_coincidences(
        system: &TimeTagStream,
        environment: &TimeTagStream,
        set: &CoincidenceSet,
        dwell: &BTreeMap<u32, f64>,
    ) -> Result<Self> {
        if system.side() != crate::timetag::Side::System || environment.side() != crate::timetag::Side::Environment {
            return Err(Error::Data("tally expects (system, environment) streams".into()));
        }
        let mut steps: BTreeMap<u32, StepTally> =
            dwell.iter().map(|(&k, &d)| (k, StepTally { dwell_s: d, ..Default::default() })).collect();
        let step_of = |t: &TimeTag| t.scanner_step.unwrap_or(0);
        for t in system.tags() {
            let s = sys_index(t.channel).ok_or_else(|| Error::Data("environment channel in system stream".into()))?;
            steps.entry(step_of(t)).or_default().system_singles[s] += 1;
        }
        let mut environment_singles = [[0u64; 2]; 2];
        for t in environment.tags() {
            if let (Some(b), Some(p)) = (t.eom_bit, port_index(t.channel)) {
                environment_singles[(b & 1) as usize][p] += 1;
            }
        }
        for (ts, te, _) in set.resolve(system, environment) {
            let entry = steps.entry(step_of(ts)).or_default();
            match (te.eom_bit, sys_index(ts.channel), port_index(te.channel)) {
                (Some(b), Some(s), Some(p)) => entry.coincidences[(b & 1) as usize][s][p] += 1,
                _ => entry.unflagged += 1,
            }
        }
        Ok(Self { window_s: set.window_s(), duration_s: dwell.values().sum(), steps, environment_singles })
    }

    pub fn merge(&mut self, other: &Tally) {
        if self.window_s == 0.0 {
            self.window_s = other.window_s;
        }
        self.duration_s += other.duration_s;
        for (k, st) in &other.steps {
            self.steps.entry(*k).or_default().merge(st);
        }
        for e in 0..2 {
            for p in 0..2 {
                self.environment_singles[e][p] += other.environment_singles[e][p];
            }
        }
    }

    /// Conditioned `[Det1, Det2]` coincidences summed over steps.
    pub fn conditioned(&self, cond: EnvCondition) -> [u64; 2] {
        self.steps.values().fold([0, 0], |acc, st| {
            let c = st.conditioned(cond);
            [acc[0] + c[0], acc[1] + c[1]]
        })
    }

    pub fn total_coincidences(&self) -> u64 {
        self.steps
            .values()
            .map(|s| s.coincidences.iter().flatten().flatten().sum::<u64>() + s.unflagged)
            .sum()
    }

    /// Expected accidental coincidences at `step` for system detector `det`
    /// under `cond`: `N_sys · r_env · window`.
    pub fn expected_accidentals(&self, step: u32, det: usize, cond: EnvCondition) -> f64 {
        if self.duration_s <= 0.0 {
            return 0.0;
        }
        let r_env = self.environment_singles[cond.eom_bit as usize][cond.port.index()] as f64 / self.duration_s;
        self.steps.get(&step).map_or(0.0, |s| s.system_singles[det] as f64 * r_env * self.window_s)
    }
}
