use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(msg()))
    }
}

/// Pulsed pair source and the base per-arm detection probabilities
/// (coupling × detector efficiency, before channel attenuation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub pulse_rate_hz: f64,
    pub pair_prob_per_pulse: f64,
    pub arm_transmission_s: f64,
    pub arm_transmission_e: f64,
    #[serde(default)]
    pub pump_nm: Option<f64>,
    #[serde(default)]
    pub down_conversion_nm: Option<f64>,
}

impl SourceConfig {
    pub fn validate(&self) -> Result<()> {
        check(self.pulse_rate_hz > 0.0 && self.pulse_rate_hz.is_finite(), || {
            format!("source.pulse_rate_hz = {} must be positive", self.pulse_rate_hz)
        })?;
        for (name, p) in [
            ("pair_prob_per_pulse", self.pair_prob_per_pulse),
            ("arm_transmission_s", self.arm_transmission_s),
            ("arm_transmission_e", self.arm_transmission_e),
        ] {
            check((0.0..=1.0).contains(&p), || format!("source.{name} = {p} outside [0, 1]"))?;
        }
        Ok(())
    }

    pub fn pair_rate_hz(&self) -> f64 {
        self.pulse_rate_hz * self.pair_prob_per_pulse
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QrngConfig {
    pub autocorrelation_time_s: f64,
    /// Delay from bit generation to the EOM acting on it.
    pub latency_s: f64,
    /// Fixed generator seed; derived from the run seed when absent.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl QrngConfig {
    pub fn validate(&self) -> Result<()> {
        check(self.autocorrelation_time_s >= 0.0 && self.latency_s >= 0.0, || {
            "qrng times must be nonnegative".to_string()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EomMode {
    /// A 1-bit fires one short high-voltage cycle; otherwise 0 V.
    PulsedOn,
    /// Every bit selects +QV or −QV, held until the next trigger.
    Toggled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EomConfig {
    pub mode: EomMode,
    pub toggle_rate_hz: f64,
    pub rise_time_s: f64,
    /// Length of each +QV cycle (pulsed-on).
    #[serde(default)]
    pub on_window_s: Option<f64>,
    /// Detections this soon after a trigger are flagged invalid (toggled).
    #[serde(default)]
    pub settle_discard_s: Option<f64>,
    #[serde(default)]
    pub quarter_voltage_v: Option<f64>,
    /// Applied voltage as a fraction of the quarter-wave voltage.
    #[serde(default = "unit")]
    pub drive_amplitude: f64,
}

fn unit() -> f64 {
    1.0
}

impl EomConfig {
    pub fn validate(&self) -> Result<()> {
        check(self.toggle_rate_hz > 0.0 && self.toggle_rate_hz.is_finite(), || {
            format!("eom.toggle_rate_hz = {} must be positive", self.toggle_rate_hz)
        })?;
        check(self.rise_time_s >= 0.0, || "eom.rise_time_s must be nonnegative".into())?;
        check((0.0..=1.0).contains(&self.drive_amplitude), || {
            format!("eom.drive_amplitude = {} outside [0, 1]", self.drive_amplitude)
        })?;
        let slot = self.bit_period_s();
        match self.mode {
            EomMode::PulsedOn => {
                let on = self
                    .on_window_s
                    .ok_or_else(|| Error::Config("eom.on_window_s required in pulsed-on mode".into()))?;
                check(on > 0.0 && 2.0 * self.rise_time_s + on <= slot, || {
                    format!("eom.on_window_s = {on} must be positive and fit, with both edges, in a {slot} s bit slot")
                })
            }
            EomMode::Toggled => {
                let settle = self
                    .settle_discard_s
                    .ok_or_else(|| Error::Config("eom.settle_discard_s required in toggled mode".into()))?;
                check(settle > 0.0 && settle >= self.rise_time_s && settle < slot, || {
                    format!("eom.settle_discard_s = {settle} must cover the rise time and be shorter than a bit slot")
                })
            }
        }
    }

    /// Spacing of the QRNG bits that drive the modulator. In pulsed-on mode
    /// bits are sampled at twice the toggle rate so that +QV cycles fire at
    /// `toggle_rate` on average.
    pub fn bit_period_s(&self) -> f64 {
        match self.mode {
            EomMode::PulsedOn => 0.5 / self.toggle_rate_hz,
            EomMode::Toggled => 1.0 / self.toggle_rate_hz,
        }
    }
}

/// Propagation and detection for one arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    #[serde(default)]
    pub attenuation_db: f64,
    /// Dark plus background counts, per detector.
    #[serde(default)]
    pub dark_rate_hz: f64,
    /// Scale of the one-sided detector latency jitter.
    #[serde(default)]
    pub jitter_sigma_s: f64,
}

impl ChannelConfig {
    pub fn validate(&self, arm: &str) -> Result<()> {
        check(self.attenuation_db >= 0.0 && self.dark_rate_hz >= 0.0 && self.jitter_sigma_s >= 0.0, || {
            format!("channels.{arm}: attenuation, dark rate and jitter must be nonnegative")
        })
    }

    pub fn transmission(&self) -> f64 {
        10f64.powf(-self.attenuation_db / 10.0)
    }
}
