use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::tally::{EnvCondition, Estimate, Tally};
use crate::error::{Error, Result};
use crate::quantum::{visibility_from_extrema, EnvOutcome};

/// Conditioned coincidences at one piezo position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringePoint {
    pub step: u32,
    pub phase: f64,
    pub dwell_s: f64,
    /// `[system detector][environment port]`, after any subtraction.
    pub counts: [[f64; 2]; 2],
    /// Amount already subtracted from each bin.
    pub subtracted: [[f64; 2]; 2],
    /// Expected accidentals per bin, for later subtraction.
    pub accidentals: [[f64; 2]; 2],
}

impl FringePoint {
    /// Variance of a bin: the raw Poisson count, before subtraction.
    pub fn variance(&self, det: usize, port: usize) -> f64 {
        self.counts[det][port] + self.subtracted[det][port]
    }
}

/// A phase scan for one modulator status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeScan {
    pub eom_bit: u8,
    pub points: Vec<FringePoint>,
    pub background_subtracted: bool,
}

impl FringeScan {
    /// Builds the scan from a tally; `phases` maps scanner steps to radians.
    pub fn from_tally(tally: &Tally, eom_bit: u8, phases: &BTreeMap<u32, f64>) -> Result<Self> {
        let mut points = Vec::with_capacity(tally.steps.len());
        for (&step, st) in &tally.steps {
            let phase = *phases
                .get(&step)
                .ok_or_else(|| Error::Data(format!("no phase calibration for scanner step {step}")))?;
            let mut counts = [[0.0; 2]; 2];
            let mut accidentals = [[0.0; 2]; 2];
            for port in EnvOutcome::ALL {
                let cond = EnvCondition { eom_bit, port };
                let c = st.conditioned(cond);
                for det in 0..2 {
                    counts[det][port.index()] = c[det] as f64;
                    accidentals[det][port.index()] = tally.expected_accidentals(step, det, cond);
                }
            }
            points.push(FringePoint { step, phase, dwell_s: st.dwell_s, counts, subtracted: [[0.0; 2]; 2], accidentals });
        }
        Ok(Self { eom_bit, points, background_subtracted: false })
    }

    pub fn series(&self, det: usize, port: EnvOutcome) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.phase, p.counts[det][port.index()])).collect()
    }
}

fn subtract_with(scan: &FringeScan, amount: impl Fn(&FringePoint, usize, usize) -> f64) -> FringeScan {
    let points = scan
        .points
        .iter()
        .map(|p| {
            let mut q = *p;
            for d in 0..2 {
                for e in 0..2 {
                    let take = amount(p, d, e).min(p.counts[d][e]).max(0.0);
                    q.counts[d][e] -= take;
                    q.subtracted[d][e] += take;
                }
            }
            q
        })
        .collect();
    FringeScan { eom_bit: scan.eom_bit, points, background_subtracted: true }
}

/// Removes `accidental_rate · dwell` from every bin, clamping at zero. The
/// bin variance stays that of the raw count.
pub fn subtract_background(scan: &FringeScan, accidental_rate_hz: f64, dwell_s: f64) -> FringeScan {
    if accidental_rate_hz == 0.0 {
        return scan.clone();
    }
    subtract_with(scan, |_, _, _| accidental_rate_hz * dwell_s)
}

/// Removes each bin's own singles-based accidental estimate.
pub fn subtract_estimated_accidentals(scan: &FringeScan) -> FringeScan {
    subtract_with(scan, |p, d, e| p.accidentals[d][e])
}

/// Weighted least-squares sinusoid `C(φ) = O + A·cos(φ − φ₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    pub offset: f64,
    pub amplitude: f64,
    /// In `(−π, π]`.
    pub phase0: Estimate,
    pub visibility: Estimate,
    /// Visibility from the largest and smallest observed bins.
    pub raw_visibility: f64,
    pub reduced_chi2: f64,
    pub points: usize,
}

impl FringeFit {
    pub fn model(&self, phi: f64) -> f64 {
        self.offset + self.amplitude * (phi - self.phase0.value).cos()
    }
}

const IRLS_ROUNDS: usize = 5;

/// Fits one detector's counts conditioned on one analyzer port.
///
/// The model is linear in `(O, A cos φ₀, A sin φ₀)`; weights are Poisson,
/// `1/max(model + subtracted, 1)`, refined by a few reweighting rounds.
pub fn fit_fringe(scan: &FringeScan, det: usize, port: EnvOutcome) -> Result<FringeFit> {
    let e = port.index();
    let pts: Vec<(f64, f64, f64, f64)> = scan
        .points
        .iter()
        .map(|p| (p.phase, p.counts[det][e], p.subtracted[det][e], p.variance(det, e)))
        .collect();
    if pts.len() < 6 {
        return Err(Error::Fit(format!("need at least 6 phase points, have {}", pts.len())));
    }
    let (lo, hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p.0), h.max(p.0)));
    // A scan of n evenly spaced points covers one period once its span
    // reaches (n−1)/n of 2π.
    let n = pts.len() as f64;
    if hi - lo < TAU * (n - 1.0) / n - 1e-9 {
        return Err(Error::Fit(format!("phase span {:.3} rad is less than one period", hi - lo)));
    }
    let mut var: Vec<f64> = pts.iter().map(|p| p.3.max(1.0)).collect();
    let mut beta = Vector3::zeros();
    let mut cov = Matrix3::zeros();
    for _ in 0..IRLS_ROUNDS {
        let mut xtwx = Matrix3::zeros();
        let mut xtwy = Vector3::zeros();
        for (p, v) in pts.iter().zip(&var) {
            let x = Vector3::new(1.0, p.0.cos(), p.0.sin());
            xtwx += x * x.transpose() / *v;
            xtwy += x * p.1 / *v;
        }
        cov = xtwx.try_inverse().ok_or_else(|| Error::Fit("singular normal equations".into()))?;
        beta = cov * xtwy;
        for (p, v) in pts.iter().zip(var.iter_mut()) {
            let model = beta[0] + beta[1] * p.0.cos() + beta[2] * p.0.sin();
            *v = (model + p.2).max(1.0);
        }
    }
    if !beta.iter().all(|b| b.is_finite()) {
        return Err(Error::Fit("fit did not converge".into()));
    }
    let (o, bc, bs) = (beta[0], beta[1], beta[2]);
    if o <= 0.0 {
        return Err(Error::Fit(format!("fitted offset {o} is not positive")));
    }
    let a = bc.hypot(bs);
    let v = a / o;
    let (var_v, var_phi) = if a > 0.0 {
        let gv = Vector3::new(-a / (o * o), bc / (a * o), bs / (a * o));
        let gp = Vector3::new(0.0, -bs / (a * a), bc / (a * a));
        ((gv.transpose() * cov * gv)[0], (gp.transpose() * cov * gp)[0])
    } else {
        (cov[(1, 1)].max(cov[(2, 2)]) / (o * o), PI * PI)
    };
    let chi2: f64 = pts
        .iter()
        .zip(&var)
        .map(|(p, v)| (p.1 - (o + bc * p.0.cos() + bs * p.0.sin())).powi(2) / v)
        .sum();
    let (cmin, cmax) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p.1), h.max(p.1)));
    Ok(FringeFit {
        offset: o,
        amplitude: a,
        phase0: Estimate::new(bs.atan2(bc), var_phi.sqrt()),
        visibility: Estimate::new(v, var_v.sqrt()),
        raw_visibility: visibility_from_extrema(cmax, cmin).unwrap_or(0.0),
        reduced_chi2: chi2 / (n - 3.0).max(1.0),
        points: pts.len(),
    })
}

/// `φ₁ − φ₂` wrapped into `(−π, π]`.
pub fn phase_difference(a: &FringeFit, b: &FringeFit) -> Estimate {
    let mut d = (a.phase0.value - b.phase0.value) % TAU;
    if d > PI {
        d -= TAU;
    } else if d <= -PI {
        d += TAU;
    }
    Estimate::new(d, a.phase0.sigma.hypot(b.phase0.sigma))
}

/// True when the two fringes are π out of phase within `n` sigma.
pub fn pi_shifted(a: &FringeFit, b: &FringeFit, n: f64) -> bool {
    let d = phase_difference(a, b);
    (PI - d.value.abs()) <= n * d.sigma
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Poisson};

    fn scan(counts: impl Fn(f64) -> f64, n: u32, seed: u64) -> FringeScan {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..n)
            .map(|k| {
                let phase = k as f64 * 2.0 * TAU / n as f64;
                let c = Poisson::new(counts(phase)).unwrap().sample(&mut rng);
                FringePoint {
                    step: k,
                    phase,
                    dwell_s: 1.0,
                    counts: [[c, c], [c, c]],
                    subtracted: [[0.0; 2]; 2],
                    accidentals: [[0.0; 2]; 2],
                }
            })
            .collect();
        FringeScan { eom_bit: 1, points, background_subtracted: false }
    }

    #[test]
    fn recovers_synthetic_visibility() {
        let mut hits = 0;
        for seed in 0..20 {
            let s = scan(|p| 200.0 * (1.0 + 0.95 * p.cos()), 24, seed);
            let fit = fit_fringe(&s, 0, EnvOutcome::Plus).unwrap();
            hits += fit.visibility.within_sigmas(0.95, 2.0) as u32;
            assert!(fit.visibility.sigma > 0.0 && fit.visibility.sigma < 0.05);
        }
        // About 95 % expected inside 2σ.
        assert!(hits >= 16, "{hits}");
    }

    #[test]
    fn flat_counts_give_zero_visibility() {
        let s = scan(|_| 300.0, 24, 4);
        let fit = fit_fringe(&s, 0, EnvOutcome::Plus).unwrap();
        assert!(fit.visibility.value < 2.0 * fit.visibility.sigma + 0.02, "{:?}", fit.visibility);
    }

    #[test]
    fn extrema_of_fit_agree() {
        let s = scan(|p| 100.0 * (1.0 + 0.6 * (p - 0.4).cos()), 24, 5);
        let fit = fit_fringe(&s, 0, EnvOutcome::Plus).unwrap();
        let v = visibility_from_extrema(fit.offset + fit.amplitude, fit.offset - fit.amplitude).unwrap();
        assert!((v - fit.visibility.value).abs() < 1e-12);
    }

    #[test]
    fn rejects_short_scans() {
        let mut s = scan(|_| 10.0, 24, 6);
        s.points.truncate(5);
        assert!(matches!(fit_fringe(&s, 0, EnvOutcome::Plus), Err(Error::Fit(_))));
        let mut s = scan(|_| 10.0, 24, 6);
        s.points.truncate(8);
        assert!(matches!(fit_fringe(&s, 0, EnvOutcome::Plus), Err(Error::Fit(_))));
    }

    #[test]
    fn background_subtraction_clamps_and_keeps_variance() {
        let s = scan(|_| 10.0, 8, 7);
        let b = subtract_background(&s, 1e3, 1.0);
        assert!(b.points.iter().all(|p| p.counts[0][0] == 0.0));
        assert_eq!(b.points[0].variance(0, 0), s.points[0].counts[0][0]);
        assert_eq!(subtract_background(&s, 0.0, 1.0), s);
    }
}
