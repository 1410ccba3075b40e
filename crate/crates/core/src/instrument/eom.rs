use super::config::{EomConfig, EomMode};
use super::qrng::QrngBits;
use crate::error::{Error, Result};

/// Modulator state seen by a photon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EomState {
    /// Retardance as a fraction of a quarter wave.
    pub drive: f64,
    /// True once a switching transition has settled.
    pub valid: bool,
    /// Whether the current bit selected the switched setting (+QV).
    pub switched: bool,
    /// The QRNG bit in force.
    pub bit: bool,
}

impl EomState {
    /// The EOM-status annotation written to environment tags.
    pub fn status_bit(&self) -> Option<u8> {
        self.valid.then_some(self.switched as u8)
    }
}

/// Precomputed picosecond timings for [`eom_state_at`].
#[derive(Debug, Clone, Copy)]
pub(crate) struct EomTiming {
    mode: EomMode,
    rise_ps: u64,
    on_ps: u64,
    settle_ps: u64,
    amplitude: f64,
}

fn ps(s: f64) -> u64 {
    (s * 1e12).round() as u64
}

impl EomTiming {
    pub(crate) fn new(cfg: &EomConfig) -> Self {
        Self {
            mode: cfg.mode,
            rise_ps: ps(cfg.rise_time_s),
            on_ps: ps(cfg.on_window_s.unwrap_or(0.0)),
            settle_ps: ps(cfg.settle_discard_s.unwrap_or(0.0)),
            amplitude: cfg.drive_amplitude,
        }
    }

    pub(crate) fn state(&self, bits: &QrngBits, t_ps: u64) -> Option<EomState> {
        let (k, since) = bits.slot_at(t_ps)?;
        let bit = bits.get(k);
        Some(match self.mode {
            EomMode::PulsedOn => {
                let on_end = self.rise_ps + self.on_ps;
                if !bit || since >= on_end + self.rise_ps {
                    EomState { drive: 0.0, valid: true, switched: false, bit }
                } else if since < self.rise_ps {
                    EomState { drive: 0.0, valid: false, switched: true, bit }
                } else if since < on_end {
                    EomState { drive: self.amplitude, valid: true, switched: true, bit }
                } else {
                    EomState { drive: 0.0, valid: false, switched: false, bit }
                }
            }
            EomMode::Toggled => {
                let level = |b: bool| if b { self.amplitude } else { -self.amplitude };
                // Before the rise completes the previous setting still acts.
                let drive = if since < self.rise_ps && k > 0 { level(bits.get(k - 1)) } else { level(bit) };
                EomState { drive, valid: since >= self.settle_ps, switched: bit, bit }
            }
        })
    }
}

/// Modulator drive and validity at lab time `t_s`.
///
/// Pulsed-on: a 1-bit raises the drive to `drive_amplitude` for `on_window`
/// after the rise time, with both edges flagged invalid. Toggled: each bit
/// sets `±drive_amplitude`; detections within `settle_discard` of any
/// trigger are invalid.
pub fn eom_state_at(t_s: f64, bits: &QrngBits, cfg: &EomConfig) -> Result<EomState> {
    let (lo, hi) = bits.span_ps();
    if !(t_s >= 0.0) {
        return Err(Error::Domain(format!("time {t_s} s outside the bit sequence")));
    }
    EomTiming::new(cfg).state(bits, ps(t_s)).ok_or_else(|| {
        Error::Domain(format!("time {t_s} s outside the bit sequence [{} s, {} s)", lo as f64 * 1e-12, hi as f64 * 1e-12))
    })
}

/// Time fractions `(valid, valid ∧ switched, drive ≠ 0)` over the bit
/// sequence, evaluated on a grid of `step_s`.
pub fn duty_fractions(bits: &QrngBits, cfg: &EomConfig, step_s: f64) -> (f64, f64, f64) {
    let timing = EomTiming::new(cfg);
    let (lo, hi) = bits.span_ps();
    let step = ps(step_s).max(1);
    let (mut n, mut valid, mut switched, mut driven) = (0u64, 0u64, 0u64, 0u64);
    let mut t = lo;
    while t < hi {
        let s = timing.state(bits, t).expect("inside span");
        n += 1;
        valid += s.valid as u64;
        switched += (s.valid && s.switched) as u64;
        driven += (s.drive != 0.0) as u64;
        t += step;
    }
    let f = |x: u64| x as f64 / n as f64;
    (f(valid), f(switched), f(driven))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instrument::config::QrngConfig;
    use crate::instrument::qrng::qrng_stream;

    pub(crate) fn vienna() -> EomConfig {
        EomConfig {
            mode: EomMode::PulsedOn,
            toggle_rate_hz: 2e6,
            rise_time_s: 4.5e-9,
            on_window_s: Some(20e-9),
            settle_discard_s: None,
            quarter_voltage_v: Some(770.0),
            drive_amplitude: 1.0,
        }
    }

    fn canaries() -> EomConfig {
        EomConfig {
            mode: EomMode::Toggled,
            toggle_rate_hz: 1e6,
            rise_time_s: 15e-9,
            on_window_s: None,
            settle_discard_s: Some(35e-9),
            quarter_voltage_v: None,
            drive_amplitude: 1.0,
        }
    }

    fn bits(cfg: &EomConfig, duration: f64) -> QrngBits {
        let q = QrngConfig { autocorrelation_time_s: 11e-9, latency_s: 75e-9, seed: Some(5) };
        qrng_stream(&q, cfg.bit_period_s(), duration).unwrap()
    }

    #[test]
    fn vienna_on_fraction_is_four_percent() {
        let cfg = vienna();
        let (valid, _, driven) = duty_fractions(&bits(&cfg, 5e-3), &cfg, 0.5e-9);
        assert!((driven - 0.04).abs() < 0.002, "{driven}");
        assert!((valid - (1.0 - 0.5 * 9.0 / 250.0)).abs() < 0.002, "{valid}");
    }

    #[test]
    fn canaries_valid_fraction() {
        let cfg = canaries();
        let (valid, switched, _) = duty_fractions(&bits(&cfg, 5e-3), &cfg, 1e-9);
        assert!((valid - 0.965).abs() < 1e-3, "{valid}");
        assert!((switched / valid - 0.5).abs() < 0.03, "{switched} {valid}");
    }

    #[test]
    fn rise_window_is_invalid() {
        let cfg = vienna();
        let b = bits(&cfg, 1e-4);
        let k = (0..b.len()).find(|&k| b.get(k)).unwrap();
        let t0 = 75e-9 + k as f64 * 250e-9;
        let during_rise = eom_state_at(t0 + 2e-9, &b, &cfg).unwrap();
        assert!(!during_rise.valid);
        assert_eq!(during_rise.status_bit(), None);
        let on = eom_state_at(t0 + 10e-9, &b, &cfg).unwrap();
        assert!(on.valid && on.drive == 1.0 && on.status_bit() == Some(1));
        let after = eom_state_at(t0 + 100e-9, &b, &cfg).unwrap();
        assert!(after.valid && after.drive == 0.0 && after.status_bit() == Some(0));
    }

    #[test]
    fn outside_span_is_domain_error() {
        let cfg = canaries();
        let b = bits(&cfg, 1e-5);
        assert!(eom_state_at(1e-9, &b, &cfg).is_err());
        assert!(eom_state_at(1.0, &b, &cfg).is_err());
        assert!(eom_state_at(-1.0, &b, &cfg).is_err());
    }
}
