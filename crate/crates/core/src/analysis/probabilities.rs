use serde::{Deserialize, Serialize};

use super::tally::{EnvCondition, Estimate, Tally};
use crate::error::{Error, Result};

/// Renormalized `P(Det1 | cond)`, `P(Det2 | cond)` from conditioned counts.
///
/// `σ = √(N₁N₂/N³)`, the first-order Poisson propagation of `N₁/(N₁+N₂)`.
pub fn probabilities_from_counts(counts: [u64; 2]) -> Result<[Estimate; 2]> {
    let [n1, n2] = counts.map(|c| c as f64);
    let n = n1 + n2;
    if n == 0.0 {
        return Err(Error::InsufficientData("no conditioned coincidences".into()));
    }
    let sigma = (n1 * n2 / n.powi(3)).sqrt();
    Ok([Estimate::new(n1 / n, sigma), Estimate::new(n2 / n, sigma)])
}

/// System-detector probabilities given an environment outcome, summed over
/// all scanner steps of `tally`.
pub fn conditional_probabilities(tally: &Tally, cond: EnvCondition) -> Result<[Estimate; 2]> {
    probabilities_from_counts(tally.conditioned(cond)).map_err(|_| {
        Error::InsufficientData(format!("no coincidences conditioned on {}", cond.name()))
    })
}

/// Path probabilities from the two blocking runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathProbabilities {
    pub condition: EnvCondition,
    /// Conditioned coincidences with only path a open (b blocked).
    pub n_a: u64,
    pub n_b: u64,
    pub p_a: Estimate,
    pub p_b: Estimate,
    /// `|P(a) − P(b)|`.
    pub welcher_weg: Estimate,
}

/// `P(a) = N_a / (N_a + N_b)` with `N_a` the conditioned coincidences when
/// path b is blocked. With `subtract_accidentals` each run's expected
/// accidentals are removed first; variances stay those of the raw counts.
pub fn path_probabilities(
    path_a_open: &Tally,
    path_b_open: &Tally,
    cond: EnvCondition,
    subtract_accidentals: bool,
) -> Result<PathProbabilities> {
    let sum = |t: &Tally| {
        let c = t.conditioned(cond);
        let raw = (c[0] + c[1]) as f64;
        let acc: f64 = if subtract_accidentals {
            t.steps.keys().map(|&k| (0..2).map(|d| t.expected_accidentals(k, d, cond)).sum::<f64>()).sum()
        } else {
            0.0
        };
        (c[0] + c[1], raw, (raw - acc).max(0.0))
    };
    let (n_a, raw_a, a) = sum(path_a_open);
    let (n_b, raw_b, b) = sum(path_b_open);
    let s = a + b;
    if s <= 0.0 {
        return Err(Error::InsufficientData(format!("blocking runs hold no {} coincidences", cond.name())));
    }
    let sigma = ((b * b * raw_a + a * a * raw_b) / s.powi(4)).sqrt();
    let (pa, pb) = (a / s, b / s);
    Ok(PathProbabilities {
        condition: cond,
        n_a,
        n_b,
        p_a: Estimate::new(pa, sigma),
        p_b: Estimate::new(pb, sigma),
        welcher_weg: Estimate::new((pa - pb).abs(), 2.0 * sigma),
    })
}
