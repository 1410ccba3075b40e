//! Welcher-weg information, visibility, and the imperfect complementarity bound.

use serde::{Deserialize, Serialize};

use super::optics::extinction_contrast;
use crate::error::{domain, Result};

/// `I = |P(a|·) − P(b|·)|`.
pub fn welcher_weg_parameter(p_a: f64, p_b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_a) || !(0.0..=1.0).contains(&p_b) {
        return domain(format!("path probabilities ({p_a}, {p_b}) outside [0, 1]"));
    }
    if (p_a + p_b - 1.0).abs() > 0.05 {
        return domain(format!("path probabilities sum to {}, not 1", p_a + p_b));
    }
    Ok((p_a - p_b).abs())
}

/// `V = (C_max − C_min)/(C_max + C_min)`.
pub fn visibility_from_extrema(c_max: f64, c_min: f64) -> Result<f64> {
    if !(c_min >= 0.0) || c_max < c_min {
        return domain(format!("need c_max ≥ c_min ≥ 0, got ({c_max}, {c_min})"));
    }
    if c_max + c_min <= 0.0 {
        return domain("both extrema are zero");
    }
    Ok((c_max - c_min) / (c_max + c_min))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplementarityFactors {
    pub eta_i: f64,
    pub eta_v: f64,
}

impl ComplementarityFactors {
    pub fn new(eta_i: f64, eta_v: f64) -> Result<Self> {
        if !(eta_i > 0.0 && eta_i <= 1.0 && eta_v > 0.0 && eta_v <= 1.0) {
            return domain(format!("correction factors ({eta_i}, {eta_v}) outside (0, 1]"));
        }
        Ok(Self { eta_i, eta_v })
    }

    pub const IDEAL: Self = Self { eta_i: 1.0, eta_v: 1.0 };

    /// `I²/η_I² + V²/η_V²`; at most 1 for any admissible measurement.
    pub fn normalized_radius(&self, i_value: f64, v_value: f64) -> f64 {
        (i_value / self.eta_i).powi(2) + (v_value / self.eta_v).powi(2)
    }
}

/// Largest visibility compatible with `i_value`: `η_V·√(1 − (I/η_I)²)`.
pub fn complementarity_bound(i_value: f64, factors: ComplementarityFactors) -> Result<f64> {
    if !(i_value >= 0.0) || i_value > factors.eta_i {
        return domain(format!("I = {i_value} exceeds η_I = {}", factors.eta_i));
    }
    let r = i_value / factors.eta_i;
    Ok(factors.eta_v * (1.0 - r * r).max(0.0).sqrt())
}

/// Composes the state visibilities with the analyzer contrasts:
/// `η_I = v_hv·ε_pbs`, `η_V = v_coh·ε_pbs·ε_eom`.
pub fn derive_correction_factors(
    v_hv: f64,
    v_coh: f64,
    pbs_extinction: f64,
    eom_extinction: f64,
) -> Result<ComplementarityFactors> {
    if !(pbs_extinction > 1.0 && eom_extinction > 1.0) {
        return domain("extinction ratios must exceed 1");
    }
    let pbs = extinction_contrast(pbs_extinction);
    let eom = extinction_contrast(eom_extinction);
    ComplementarityFactors::new(v_hv * pbs, v_coh * pbs * eom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welcher_weg_examples() {
        assert!((welcher_weg_parameter(0.023, 0.978).unwrap() - 0.955).abs() < 1e-12);
        assert_eq!(welcher_weg_parameter(0.5, 0.5).unwrap(), 0.0);
        assert_eq!(welcher_weg_parameter(1.0, 0.0).unwrap(), 1.0);
        assert!(welcher_weg_parameter(0.3, 0.3).is_err());
    }

    #[test]
    fn visibility_examples() {
        assert!((visibility_from_extrema(390.0, 10.0).unwrap() - 0.95).abs() < 1e-15);
        assert_eq!(visibility_from_extrema(100.0, 100.0).unwrap(), 0.0);
        assert!(visibility_from_extrema(0.0, 0.0).is_err());
        assert!(visibility_from_extrema(1.0, 2.0).is_err());
    }

    #[test]
    fn bound_examples() {
        assert_eq!(complementarity_bound(0.0, ComplementarityFactors::IDEAL).unwrap(), 1.0);
        let f = ComplementarityFactors::new(0.97, 0.95).unwrap();
        assert!(complementarity_bound(0.97, f).unwrap().abs() < 1e-15);
        // 0.95·sqrt(1 − (0.5/0.97)²) evaluated with 50-digit arithmetic.
        assert!((complementarity_bound(0.5, f).unwrap() - 0.814_065_720_4).abs() < 1e-9);
        assert!(complementarity_bound(0.98, f).is_err());
    }

    #[test]
    fn correction_factor_examples() {
        let f = derive_correction_factors(0.98, 0.969, 180.0, 250.0).unwrap();
        assert!((f.eta_i - 0.969_171_270_7).abs() < 1e-9);
        assert!((f.eta_v - 0.950_657_018_4).abs() < 1e-9);
        let ideal = derive_correction_factors(1.0, 1.0, f64::INFINITY, f64::INFINITY).unwrap();
        assert_eq!(ideal, ComplementarityFactors::IDEAL);
        let half = derive_correction_factors(0.5, 0.5, 180.0, 250.0).unwrap();
        assert!((half.eta_i - 0.494_475_138_1).abs() < 1e-9);
        assert!((half.eta_v - 0.490_535_097_2).abs() < 1e-9);
    }
}
