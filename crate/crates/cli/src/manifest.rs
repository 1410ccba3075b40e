//! Run manifests: the fully resolved experiment plus what was run, enough
//! to repeat a run from the manifest alone.

use std::fs;
use std::path::Path;

use anyhow::Context;
use qeraser_core::config::ExperimentConfig;
use qeraser_core::instrument::RunPlan;
use qeraser_core::quantum::Blocked;
use qeraser_core::Error;
use serde::{Deserialize, Serialize};

pub const MANIFEST_FILE: &str = "manifest.toml";

/// One simulated run: the open-path scan or a blocking run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Part {
    Scan,
    /// Path b blocked, so only path a reaches the detectors.
    AOpen,
    BOpen,
}

impl Part {
    pub const ALL: [Part; 3] = [Part::Scan, Part::AOpen, Part::BOpen];

    pub fn name(self) -> &'static str {
        match self {
            Part::Scan => "scan",
            Part::AOpen => "a-open",
            Part::BOpen => "b-open",
        }
    }

    pub fn index(self) -> u64 {
        self as u64
    }

    pub fn plan(self, cfg: &ExperimentConfig, eom_enabled: bool) -> RunPlan {
        match self {
            Part::Scan => cfg.schedule.scan_plan(eom_enabled),
            Part::AOpen => cfg.schedule.blocking_plan(Blocked::PathB, eom_enabled),
            Part::BOpen => cfg.schedule.blocking_plan(Blocked::PathA, eom_enabled),
        }
    }

    pub fn system_file(self) -> String {
        format!("{}.system.tags", self.name())
    }

    pub fn environment_file(self) -> String {
        format!("{}.environment.tags", self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub eom_enabled: bool,
    pub parts: Vec<Part>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub run: RunSection,
    pub experiment: ExperimentConfig,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        let text = toml::to_string(self).context("serializing manifest")?;
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(dir: &Path) -> anyhow::Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.to_string().trim_end())).into())
    }
}

/// A bundled experiment name, an experiment file, or a run manifest.
pub fn resolve_config(spec: &str) -> anyhow::Result<(ExperimentConfig, Option<RunSection>)> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
        if let Ok(m) = toml::from_str::<RunManifest>(&text) {
            return Ok((m.experiment, Some(m.run)));
        }
    } else if path.is_dir() && path.join(MANIFEST_FILE).is_file() {
        let m = RunManifest::read(path)?;
        return Ok((m.experiment, Some(m.run)));
    }
    Ok((ExperimentConfig::resolve_name_or_path(spec)?, None))
}
