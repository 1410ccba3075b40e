use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use super::config::{ChannelConfig, EomConfig, EomMode, QrngConfig, SourceConfig};
use super::eom::{EomState, EomTiming};
use super::qrng::{qrng_stream_with_rng, QrngBits};
use super::seeds::{subsystem_rng, Subsystem};
use crate::error::{Error, Result};
use crate::quantum::{
    joint_probabilities, Blocked, EnvOutcome, HybridState, InterferometerConfig, MeasurementChain, SystemOutcome,
};
use crate::spacetime::ScenarioGeometry;
use crate::timetag::{Channel, ClockModel, ClockRealization, Side, TimeTag, TimeTagStream};

/// Everything fixed about the apparatus for a series of runs.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub geometry: ScenarioGeometry,
    pub state: HybridState,
    /// Analyzer chain; its `drive` is overridden by the modulator state.
    pub chain: MeasurementChain,
    pub source: SourceConfig,
    pub qrng: QrngConfig,
    pub eom: EomConfig,
    pub system_channel: ChannelConfig,
    pub environment_channel: ChannelConfig,
    pub system_clock: ClockModel,
    pub environment_clock: ClockModel,
}

impl Experiment {
    pub fn validate(&self) -> Result<()> {
        self.chain.validate().map_err(|e| Error::Config(format!("chain: {e}")))?;
        self.source.validate()?;
        self.qrng.validate()?;
        self.eom.validate()?;
        self.system_channel.validate("system")?;
        self.environment_channel.validate("environment")?;
        self.system_clock.validate()?;
        self.environment_clock.validate()?;
        let (s, e) = self.detection_delays()?;
        if !(s >= 0.0 && e >= 0.0) {
            return Err(Error::Config(format!("scenario {} gives negative detection delays ({s} s, {e} s)", self.geometry.name)));
        }
        Ok(())
    }

    /// Lab-frame delays from emission to system and environment detection.
    pub fn detection_delays(&self) -> Result<(f64, f64)> {
        let wrap = |e: Error| Error::Config(format!("scenario {}: {e}", self.geometry.name));
        Ok((
            self.geometry.system_detection_delay().map_err(wrap)?,
            self.geometry.environment_detection_delay().map_err(wrap)?,
        ))
    }

    /// Overall detection probability per arm, `(η_s, η_e)`.
    pub fn arm_efficiencies(&self) -> (f64, f64) {
        (
            self.source.arm_transmission_s * self.system_channel.transmission(),
            self.source.arm_transmission_e * self.environment_channel.transmission(),
        )
    }

    /// Expected true-coincidence offset `t_sys − t_env` between the two
    /// local clocks, ignoring jitter and wander.
    pub fn nominal_offset_s(&self) -> Result<f64> {
        let (s, e) = self.detection_delays()?;
        Ok(s - e + self.system_clock.offset_s - self.environment_clock.offset_s)
    }
}

/// One piezo position held for `dwell_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleStep {
    pub step: u32,
    pub phase: f64,
    pub dwell_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunPlan {
    pub steps: Vec<ScheduleStep>,
    #[serde(default)]
    pub blocked: Blocked,
    /// When false the modulator stays at 0 V for the whole run.
    #[serde(default = "enabled")]
    pub eom_enabled: bool,
    /// Keep a per-pair record of what was emitted and detected.
    #[serde(default)]
    pub record_truth: bool,
}

fn enabled() -> bool {
    true
}

impl RunPlan {
    pub fn single(phase: f64, dwell_s: f64) -> Self {
        Self {
            steps: vec![ScheduleStep { step: 0, phase, dwell_s }],
            blocked: Blocked::None,
            eom_enabled: true,
            record_truth: false,
        }
    }

    pub fn duration_s(&self) -> f64 {
        self.steps.iter().map(|s| s.dwell_s).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps.is_empty() {
            return Err(Error::Config("schedule has no steps".into()));
        }
        if let Some(s) = self.steps.iter().find(|s| !(s.dwell_s > 0.0) || !s.phase.is_finite()) {
            return Err(Error::Config(format!("schedule step {} needs positive dwell and finite phase", s.step)));
        }
        Ok(())
    }
}

/// Lab-frame record of one pair that produced at least one detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionRecord {
    pub emission_s: f64,
    pub step: u32,
    /// Lab detection time and channel.
    pub system: Option<(f64, Channel)>,
    pub environment: Option<(f64, Channel)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunStats {
    /// Pairs with at least one detection.
    pub pairs: u64,
    pub both_detected: u64,
    pub system_darks: u64,
    pub environment_darks: u64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub system: TimeTagStream,
    pub environment: TimeTagStream,
    pub stats: RunStats,
    pub truth: Vec<EmissionRecord>,
}

/// Outcome distributions for one (phase, drive) setting, split by which
/// arms detect.
#[derive(Debug, Clone, Copy)]
struct Sampler {
    /// Cumulative over (Det1,+), (Det1,−), (Det2,+), (Det2,−).
    both: [f64; 4],
    sys_det1: f64,
    env_plus: f64,
}

impl Sampler {
    fn new(state: &HybridState, ifm: &InterferometerConfig, chain: &MeasurementChain, eta_s: f64) -> Self {
        use EnvOutcome::{Minus, Plus};
        use SystemOutcome::{Det1, Det2, NoClick};
        let t = joint_probabilities(state, ifm, chain);
        let w = [t.get(Det1, Plus), t.get(Det1, Minus), t.get(Det2, Plus), t.get(Det2, Minus)];
        let total: f64 = w.iter().sum();
        let mut both = [0.0; 4];
        let mut acc = 0.0;
        for (c, x) in both.iter_mut().zip(w) {
            acc += x / total;
            *c = acc;
        }
        both[3] = 1.0;
        let lost = |e| t.get(NoClick, e) + (1.0 - eta_s) * (t.get(Det1, e) + t.get(Det2, e));
        Self {
            both,
            sys_det1: (w[0] + w[1]) / total,
            env_plus: lost(Plus) / (lost(Plus) + lost(Minus)),
        }
    }
}

fn port_channel(plus: bool) -> Channel {
    if plus {
        Channel::Det3
    } else {
        Channel::Det4
    }
}

struct Modulator<'a> {
    timing: EomTiming,
    bits: &'a QrngBits,
    enabled: bool,
    levels: Vec<f64>,
}

impl Modulator<'_> {
    /// State at lab time `t`; before the first bit acts the EOM is idle and
    /// unflagged.
    fn state(&self, t: f64) -> Option<EomState> {
        let s = self.timing.state(self.bits, (t * 1e12).round().max(0.0) as u64)?;
        Some(if self.enabled { s } else { EomState { drive: 0.0, valid: true, switched: false, ..s } })
    }

    fn level(&self, s: Option<EomState>) -> usize {
        let drive = s.map_or(self.levels[0], |s| s.drive);
        self.levels.iter().position(|&d| d == drive).unwrap_or(0)
    }
}

/// Monte Carlo of one run: pair emission per pump pulse, analyzer setting
/// from the modulator state when the environment photon arrives, losses,
/// detector jitter, dark counts, and independent local clocks.
pub fn simulate_run(exp: &Experiment, plan: &RunPlan, seed: u64) -> Result<RunOutput> {
    exp.validate()?;
    plan.validate()?;
    let (d_sys, d_env) = exp.detection_delays()?;
    let duration = plan.duration_s();
    let (eta_s, eta_e) = exp.arm_efficiencies();

    let mut qrng_rng = subsystem_rng(exp.qrng.seed.unwrap_or(seed), Subsystem::Qrng);
    let bit_period = exp.eom.bit_period_s();
    let bits = qrng_stream_with_rng(&exp.qrng, bit_period, duration + d_env + 2.0 * bit_period, &mut qrng_rng)?;
    let amp = exp.eom.drive_amplitude;
    let levels = match (plan.eom_enabled, exp.eom.mode) {
        (false, _) => vec![0.0],
        (true, EomMode::PulsedOn) => vec![0.0, amp],
        (true, EomMode::Toggled) => vec![-amp, amp],
    };
    let modulator = Modulator { timing: EomTiming::new(&exp.eom), bits: &bits, enabled: plan.eom_enabled, levels };

    let samplers: Vec<Vec<Sampler>> = plan
        .steps
        .iter()
        .map(|st| {
            let ifm = InterferometerConfig { phase: st.phase, blocked: plan.blocked };
            modulator
                .levels
                .iter()
                .map(|&d| Sampler::new(&exp.state, &ifm, &exp.chain.with_drive(d), eta_s))
                .collect()
        })
        .collect();
    // The chance that the system photon reaches a detector depends only on
    // blocking, so one value serves the whole run.
    let p_click = {
        let ifm = InterferometerConfig { phase: 0.0, blocked: plan.blocked };
        let t = joint_probabilities(&exp.state, &ifm, &exp.chain);
        1.0 - t.get(SystemOutcome::NoClick, EnvOutcome::Plus) - t.get(SystemOutcome::NoClick, EnvOutcome::Minus)
    };
    let a = eta_s * p_click;
    let b = eta_e;
    let q = 1.0 - (1.0 - a) * (1.0 - b);
    let p_pulse = exp.source.pair_prob_per_pulse * q;

    // Step boundaries as cumulative end times.
    let ends: Vec<f64> = plan
        .steps
        .iter()
        .scan(0.0, |acc, s| {
            *acc += s.dwell_s;
            Some(*acc)
        })
        .collect();
    let step_at = |t: f64| ends.partition_point(|&e| e <= t).min(ends.len() - 1);

    let horizon = duration + d_sys.max(d_env) + 1e-3;
    let mut sys_clock_rng = subsystem_rng(seed, Subsystem::SystemClock);
    let mut env_clock_rng = subsystem_rng(seed, Subsystem::EnvironmentClock);
    let sys_clock = ClockRealization::new(exp.system_clock, horizon, &mut sys_clock_rng);
    let env_clock = ClockRealization::new(exp.environment_clock, horizon, &mut env_clock_rng);
    let half_normal = |sigma: f64| (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("finite sigma"));
    let sys_jitter = half_normal(exp.system_channel.jitter_sigma_s);
    let env_jitter = half_normal(exp.environment_channel.jitter_sigma_s);

    let mut source_rng = subsystem_rng(seed, Subsystem::Source);
    let mut outcome_rng = subsystem_rng(seed, Subsystem::Outcomes);
    let mut jitter_rng = subsystem_rng(seed, Subsystem::Jitter);
    let mut sys_tags = Vec::new();
    let mut env_tags = Vec::new();
    let mut truth = Vec::new();
    let mut stats = RunStats::default();

    let n_pulses = (duration * exp.source.pulse_rate_hz).floor() as u64;
    if p_pulse > 0.0 {
        let log_miss = (-p_pulse).ln_1p();
        let mut k: u64 = 0;
        loop {
            if p_pulse < 1.0 {
                let u = 1.0 - source_rng.random::<f64>();
                k = k.saturating_add((u.ln() / log_miss).floor() as u64);
            }
            if k >= n_pulses {
                break;
            }
            let t_emit = k as f64 / exp.source.pulse_rate_hz;
            k += 1;
            stats.pairs += 1;
            let si = step_at(t_emit);
            let step = plan.steps[si].step;
            let t_env = t_emit + d_env;
            let eom = modulator.state(t_env);
            let sampler = &samplers[si][modulator.level(eom)];

            let u = outcome_rng.random::<f64>() * q;
            let (sys_hit, env_hit) = if u < a * b {
                (true, true)
            } else if u < a {
                (true, false)
            } else {
                (false, true)
            };
            let r = outcome_rng.random::<f64>();
            let (sys_ch, env_plus) = match (sys_hit, env_hit) {
                (true, true) => {
                    let idx = sampler.both.iter().position(|&c| r < c).unwrap_or(3);
                    (if idx < 2 { Channel::Det1 } else { Channel::Det2 }, Some(idx % 2 == 0))
                }
                (true, false) => (if r < sampler.sys_det1 { Channel::Det1 } else { Channel::Det2 }, None),
                _ => (Channel::Det1, Some(r < sampler.env_plus)),
            };
            let mut rec = EmissionRecord { emission_s: t_emit, step, system: None, environment: None };
            if sys_hit {
                let jit = sys_jitter.map_or(0.0, |n| n.sample(&mut jitter_rng).abs());
                let t = t_emit + d_sys + jit;
                sys_tags.push(TimeTag::system(sys_clock.stamp(t, &mut sys_clock_rng), sys_ch, step));
                rec.system = Some((t, sys_ch));
            }
            if let Some(plus) = env_plus {
                let jit = env_jitter.map_or(0.0, |n| n.sample(&mut jitter_rng).abs());
                let t = t_env + jit;
                let ch = port_channel(plus);
                env_tags.push(env_tag(env_clock.stamp(t, &mut env_clock_rng), ch, eom));
                rec.environment = Some((t, ch));
            }
            stats.both_detected += (sys_hit && env_hit) as u64;
            if plan.record_truth {
                truth.push(rec);
            }
        }
    }

    let mut dark_rng = subsystem_rng(seed, Subsystem::Darks);
    for (channel, rate) in [
        (Channel::Det1, exp.system_channel.dark_rate_hz),
        (Channel::Det2, exp.system_channel.dark_rate_hz),
        (Channel::Det3, exp.environment_channel.dark_rate_hz),
        (Channel::Det4, exp.environment_channel.dark_rate_hz),
    ] {
        let mean = rate * duration;
        if mean <= 0.0 {
            continue;
        }
        let n = Poisson::new(mean).map_err(|e| Error::Config(format!("dark rate: {e}")))?.sample(&mut dark_rng) as u64;
        for _ in 0..n {
            let t = dark_rng.random::<f64>() * duration;
            if channel.side() == Side::System {
                let step = plan.steps[step_at(t)].step;
                sys_tags.push(TimeTag::system(sys_clock.stamp(t, &mut dark_rng), channel, step));
                stats.system_darks += 1;
            } else {
                env_tags.push(env_tag(env_clock.stamp(t, &mut dark_rng), channel, modulator.state(t)));
                stats.environment_darks += 1;
            }
        }
    }

    Ok(RunOutput {
        system: TimeTagStream::from_unsorted(Side::System, exp.system_clock, sys_tags)?,
        environment: TimeTagStream::from_unsorted(Side::Environment, exp.environment_clock, env_tags)?,
        stats,
        truth,
    })
}

fn env_tag(time_ps: u64, channel: Channel, eom: Option<EomState>) -> TimeTag {
    TimeTag {
        time_ps,
        channel,
        eom_bit: eom.and_then(|s| s.status_bit()),
        qrng_bit: eom.map(|s| s.bit as u8),
        scanner_step: None,
    }
}
