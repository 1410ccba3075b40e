//! Experiment configuration files.
//!
//! One TOML document describes a complete apparatus: scenario, state,
//! analyzer chain, source, QRNG, modulator, channels, clocks, the piezo
//! schedule and analysis settings. The root `seed` is mandatory (or must be
//! supplied at resolve time) so that no run is silently nondeterministic.

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instrument::{ChannelConfig, EomConfig, Experiment, QrngConfig, RunPlan, ScheduleStep, SourceConfig};
use crate::quantum::{Blocked, HybridState, MeasurementChain};
use crate::spacetime::{build_scenario, ScenarioConfig, ScenarioGeometry};
use crate::timetag::ClockModel;

macro_rules! bundled_experiments {
    ($($name:literal => $file:literal),* $(,)?) => {
        pub const BUNDLED_EXPERIMENTS: &[&str] = &[$($name),*];

        fn bundled_source(name: &str) -> Option<&'static str> {
            match name {
                $($name => Some(include_str!(concat!("../configs/experiments/", $file))),)*
                _ => None,
            }
        }
    };
}

bundled_experiments! {
    "vienna-II" => "vienna-II.toml",
    "vienna-ideal" => "vienna-ideal.toml",
    "canaries-II" => "canaries-II.toml",
    "canaries-II'" => "canaries-IIp.toml",
    "canaries-III" => "canaries-III.toml",
}

/// A scenario given by bundled name (or file path), or written inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioSource {
    Named(String),
    Inline(Box<ScenarioConfig>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub v_hv: f64,
    pub v_coh: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Channels {
    pub system: ChannelConfig,
    pub environment: ChannelConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Clocks {
    pub system: ClockModel,
    pub environment: ClockModel,
}

/// Piezo scan: step `k` sits at `phase_offset + k · radians_per_step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub steps: u32,
    pub radians_per_step: f64,
    #[serde(default)]
    pub phase_offset: f64,
    /// Integration time per scan point.
    pub dwell_s: f64,
    /// Integration time of each blocking run.
    pub blocking_dwell_s: f64,
}

impl ScheduleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 || !(self.dwell_s > 0.0) || !(self.blocking_dwell_s > 0.0) || !self.radians_per_step.is_finite() {
            return Err(Error::Config("schedule: steps, dwell_s and blocking_dwell_s must be positive".into()));
        }
        Ok(())
    }

    pub fn phase(&self, step: u32) -> f64 {
        self.phase_offset + step as f64 * self.radians_per_step
    }

    pub fn scan_steps(&self) -> Vec<ScheduleStep> {
        (0..self.steps).map(|k| ScheduleStep { step: k, phase: self.phase(k), dwell_s: self.dwell_s }).collect()
    }

    pub fn span_rad(&self) -> f64 {
        self.radians_per_step * self.steps as f64
    }

    pub fn scan_plan(&self, eom_enabled: bool) -> RunPlan {
        RunPlan { steps: self.scan_steps(), blocked: Blocked::None, eom_enabled, record_truth: false }
    }

    pub fn blocking_plan(&self, blocked: Blocked, eom_enabled: bool) -> RunPlan {
        RunPlan {
            steps: vec![ScheduleStep { step: 0, phase: self.phase_offset, dwell_s: self.blocking_dwell_s }],
            blocked,
            eom_enabled,
            record_truth: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Full-width coincidence window.
    #[serde(default = "default_window")]
    pub window_ps: u64,
    #[serde(default = "default_span")]
    pub offset_span_s: f64,
    #[serde(default = "default_bin")]
    pub offset_bin_s: f64,
    /// Longest stretch simulated in one piece.
    #[serde(default = "default_chunk")]
    pub chunk_s: f64,
    #[serde(default)]
    pub sweep_fractions: Vec<f64>,
    /// Subtract singles-based accidental estimates before computing I and V.
    #[serde(default)]
    pub subtract_accidentals: bool,
}

fn default_window() -> u64 {
    1000
}
fn default_span() -> f64 {
    2e-6
}
fn default_bin() -> f64 {
    1e-9
}
fn default_chunk() -> f64 {
    10.0
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            window_ps: default_window(),
            offset_span_s: default_span(),
            offset_bin_s: default_bin(),
            chunk_s: default_chunk(),
            sweep_fractions: Vec::new(),
            subtract_accidentals: false,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_ps == 0 || !(self.offset_bin_s > 0.0) || !(self.offset_span_s >= self.offset_bin_s) || !(self.chunk_s > 0.0) {
            return Err(Error::Config("analysis: window, offset span/bin and chunk must be positive".into()));
        }
        if let Some(f) = self.sweep_fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
            return Err(Error::Config(format!("analysis.sweep_fractions: {f} outside [0, 1]")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub scenario: ScenarioSource,
    pub state: StateConfig,
    pub chain: MeasurementChain,
    pub source: SourceConfig,
    pub qrng: QrngConfig,
    pub eom: EomConfig,
    pub channels: Channels,
    pub clocks: Clocks,
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
    }

    pub fn bundled(name: &str) -> Result<Self> {
        let src = bundled_source(name).ok_or_else(|| {
            Error::Config(format!("unknown experiment {name:?}; available: {}", BUNDLED_EXPERIMENTS.join(", ")))
        })?;
        Self::parse(src)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        let mut cfg = Self::parse(&text)?;
        // Inline a scenario given as a relative file so the config stands alone.
        if let ScenarioSource::Named(name) = &cfg.scenario {
            if ScenarioConfig::bundled(name).is_err() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.scenario = ScenarioSource::Inline(Box::new(load_scenario_file(&base.join(name))?));
            }
        }
        Ok(cfg)
    }

    /// Bundled name, or a path to a config file.
    pub fn resolve_name_or_path(spec: &str) -> Result<Self> {
        if BUNDLED_EXPERIMENTS.contains(&spec) {
            Self::bundled(spec)
        } else if Path::new(spec).exists() {
            Self::load(spec)
        } else {
            Err(Error::Config(format!(
                "no experiment config {spec:?}; bundled: {}",
                BUNDLED_EXPERIMENTS.join(", ")
            )))
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config serializes")
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::Config("seed: missing field (set `seed` or pass --seed)".into()))
    }

    pub fn scenario_config(&self) -> Result<ScenarioConfig> {
        match &self.scenario {
            ScenarioSource::Named(name) => ScenarioConfig::bundled(name),
            ScenarioSource::Inline(cfg) => Ok((**cfg).clone()),
        }
    }

    pub fn geometry(&self) -> Result<ScenarioGeometry> {
        build_scenario(&self.scenario_config()?)
    }

    pub fn hybrid_state(&self) -> Result<HybridState> {
        HybridState::new(self.state.v_hv, self.state.v_coh).map_err(|e| Error::Config(format!("state: {e}")))
    }

    /// Checks every block and builds the apparatus.
    pub fn experiment(&self) -> Result<Experiment> {
        self.schedule.validate()?;
        self.analysis.validate()?;
        let exp = Experiment {
            geometry: self.geometry()?,
            state: self.hybrid_state()?,
            chain: self.chain.clone(),
            source: self.source,
            qrng: self.qrng,
            eom: self.eom,
            system_channel: self.channels.system,
            environment_channel: self.channels.environment,
            system_clock: self.clocks.system,
            environment_clock: self.clocks.environment,
        };
        exp.validate()?;
        Ok(exp)
    }

    /// Fully resolved copy for a run manifest: seed filled in and the
    /// scenario written inline.
    pub fn manifest(&self, seed: u64) -> Result<Self> {
        Ok(Self {
            seed: Some(seed),
            scenario: ScenarioSource::Inline(Box::new(self.scenario_config()?)),
            ..self.clone()
        })
    }
}

fn load_scenario_file(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    ScenarioConfig::parse(&text)
}

/// Phase step giving `periods` full fringe periods over `steps` points.
pub fn radians_per_step(steps: u32, periods: f64) -> f64 {
    periods * TAU / steps as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_configs_resolve() {
        for name in BUNDLED_EXPERIMENTS {
            let cfg = ExperimentConfig::bundled(name).unwrap();
            cfg.experiment().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(cfg.seed.is_some(), "{name}");
        }
    }

    #[test]
    fn missing_seed_is_a_config_error() {
        let mut cfg = ExperimentConfig::bundled("vienna-II").unwrap();
        cfg.seed = None;
        let text = cfg.to_toml();
        let back = ExperimentConfig::parse(&text).unwrap();
        assert!(matches!(back.seed(), Err(Error::Config(m)) if m.contains("seed")));
    }

    #[test]
    fn manifest_round_trips() {
        let cfg = ExperimentConfig::bundled("canaries-II").unwrap();
        let m = cfg.manifest(42).unwrap();
        let back = ExperimentConfig::parse(&m.to_toml()).unwrap();
        assert_eq!(back, m);
        assert!(matches!(back.scenario, ScenarioSource::Inline(_)));
    }

    #[test]
    fn unknown_field_names_its_path() {
        let text = ExperimentConfig::bundled("vienna-II").unwrap().to_toml().replace("dark_rate_hz", "dark_hz");
        match ExperimentConfig::parse(&text) {
            Err(Error::Config(m)) => assert!(m.contains("dark_hz"), "{m}"),
            other => panic!("{other:?}"),
        }
    }
}
