use std::io::Write;

use serde::{Deserialize, Serialize};

use super::runner::{fringe_visibility, measure_path_probabilities, scan_phases, Runner};
use super::tally::{EnvCondition, Estimate};
use crate::config::ScheduleConfig;
use crate::error::{Error, Result};
use crate::instrument::Experiment;
use crate::quantum::chain_basis;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplementarityPoint {
    pub drive: f64,
    /// Latitude of the analyzed basis on the Poincaré sphere: 0° for H/V,
    /// 90° for R/L.
    pub basis_latitude_deg: f64,
    pub welcher_weg: Estimate,
    pub visibility: Estimate,
}

impl ComplementarityPoint {
    /// `I² + V²` with first-order error.
    pub fn radius_squared(&self) -> Estimate {
        let (i, v) = (self.welcher_weg, self.visibility);
        Estimate::new(
            i.value * i.value + v.value * v.value,
            (2.0 * i.value * i.sigma).hypot(2.0 * v.value * v.sigma),
        )
    }
}

/// Each drive fraction is measured as its own sequence of runs: the two
/// blocking runs give `I` from the driven-basis minus port, and a phase
/// scan gives `V` from the plus port, all using switched events only.
pub fn complementarity_sweep<R: Runner + ?Sized>(
    fractions: &[f64],
    runner: &mut R,
    exp: &Experiment,
    schedule: &ScheduleConfig,
    subtract_accidentals: bool,
) -> Result<Vec<ComplementarityPoint>> {
    if let Some(f) = fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
        return Err(Error::Domain(format!("drive fraction {f} outside [0, 1]")));
    }
    let phases = scan_phases(schedule);
    let mut out = Vec::with_capacity(fractions.len());
    for &drive in fractions {
        let mut e = exp.clone();
        e.eom.drive_amplitude = drive;
        let paths = measure_path_probabilities(runner, &e, schedule, true, EnvCondition::L, subtract_accidentals)?;
        let tally = runner.run(&e, &schedule.scan_plan(true))?;
        let vis = fringe_visibility(&tally, &phases, EnvCondition::R, subtract_accidentals)?;
        out.push(ComplementarityPoint {
            drive,
            basis_latitude_deg: basis_latitude_deg(&e, drive),
            welcher_weg: paths.welcher_weg,
            visibility: vis.visibility,
        });
    }
    Ok(out)
}

fn basis_latitude_deg(exp: &Experiment, drive: f64) -> f64 {
    let [s1, s2, s3] = chain_basis(&exp.chain.with_drive(drive)).stokes();
    s3.atan2(s1.hypot(s2)).to_degrees().abs()
}

/// Imperfect-apparatus curve `V = η_V √(1 − (I/η_I)²)`, zero past `η_I`.
pub fn bound_curve(i: f64, eta_i: f64, eta_v: f64) -> f64 {
    let x = (i.max(0.0) / eta_i).min(1.0);
    eta_v * (1.0 - x * x).sqrt()
}

/// A point agrees with the curve if some `I'` within `n σ_I` of the
/// measured `I` puts the curve within `n σ_V` of the measured `V`.
pub fn consistent_with_curve(p: &ComplementarityPoint, eta_i: f64, eta_v: f64, n: f64) -> bool {
    let (i, v) = (p.welcher_weg, p.visibility);
    // The curve is nonincreasing in I, so its range over the I interval is
    // bounded by the values at the two ends.
    let high = bound_curve(i.value - n * i.sigma, eta_i, eta_v);
    let low = bound_curve(i.value + n * i.sigma, eta_i, eta_v);
    v.value + n * v.sigma >= low && v.value - n * v.sigma <= high
}

pub fn write_sweep_csv<W: Write>(points: &[ComplementarityPoint], mut w: W) -> std::io::Result<()> {
    writeln!(w, "drive,basis_latitude_deg,I,sigma_I,V,sigma_V")?;
    for p in points {
        writeln!(
            w,
            "{},{:.3},{:.6},{:.6},{:.6},{:.6}",
            p.drive, p.basis_latitude_deg, p.welcher_weg.value, p.welcher_weg.sigma, p.visibility.value, p.visibility.sigma
        )?;
    }
    w.flush()
}
