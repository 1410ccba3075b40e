//! Jones calculus for the environment-photon projection setup.

use std::f64::consts::FRAC_PI_2;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::state::{Matrix2c, C64};
use crate::error::{domain, Result};

pub type Vector2c = Vector2<C64>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A pair of orthogonal analyzer states. `plus` is the state sent to the
/// transmitted PBS port (Det 3), `minus` to the reflected port (Det 4).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationBasis {
    pub plus: Vector2c,
    pub minus: Vector2c,
}

impl PolarizationBasis {
    pub fn new(plus: Vector2c, minus: Vector2c) -> Result<Self> {
        let tol = 1e-12;
        if (plus.norm() - 1.0).abs() > tol || (minus.norm() - 1.0).abs() > tol {
            return domain("analyzer states must be normalized");
        }
        if plus.dotc(&minus).norm() > tol {
            return domain("analyzer states must be orthogonal");
        }
        Ok(Self { plus, minus })
    }

    pub fn horizontal_vertical() -> Self {
        Self {
            plus: Vector2c::new(c(1.0, 0.0), c(0.0, 0.0)),
            minus: Vector2c::new(c(0.0, 0.0), c(1.0, 0.0)),
        }
    }

    /// `|R⟩ = (|H⟩ + i|V⟩)/√2`, `|L⟩ = (|H⟩ − i|V⟩)/√2`.
    pub fn right_left() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            plus: Vector2c::new(c(s, 0.0), c(0.0, s)),
            minus: Vector2c::new(c(s, 0.0), c(0.0, -s)),
        }
    }

    /// `|+⟩ = (|H⟩ + |V⟩)/√2`, `|−⟩ = (|H⟩ − |V⟩)/√2`.
    pub fn diagonal() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            plus: Vector2c::new(c(s, 0.0), c(s, 0.0)),
            minus: Vector2c::new(c(s, 0.0), c(-s, 0.0)),
        }
    }

    pub fn plus_projector(&self) -> Matrix2c {
        self.plus * self.plus.adjoint()
    }

    pub fn minus_projector(&self) -> Matrix2c {
        self.minus * self.minus.adjoint()
    }

    /// Stokes vector `(S1, S2, S3)` of the `plus` state. The `minus` state is
    /// its antipode.
    pub fn stokes(&self) -> [f64; 3] {
        let (h, v) = (self.plus[0], self.plus[1]);
        let cross = h.conj() * v;
        [h.norm_sqr() - v.norm_sqr(), 2.0 * cross.re, 2.0 * cross.im]
    }

    /// Equality up to a global phase on each vector.
    pub fn same_as(&self, other: &Self, tol: f64) -> bool {
        (self.plus.dotc(&other.plus).norm() - 1.0).abs() < tol
            && (self.minus.dotc(&other.minus).norm() - 1.0).abs() < tol
    }
}

/// A linear retarder: `retardance` in radians, fast axis at `axis_deg`
/// degrees from horizontal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Retarder {
    pub retardance: f64,
    pub axis_deg: f64,
}

impl Retarder {
    pub fn quarter_wave(axis_deg: f64) -> Self {
        Self { retardance: FRAC_PI_2, axis_deg }
    }

    pub fn half_wave(axis_deg: f64) -> Self {
        Self { retardance: std::f64::consts::PI, axis_deg }
    }

    /// `R(θ) · diag(e^{-iδ/2}, e^{iδ/2}) · R(−θ)`.
    pub fn jones(&self) -> Matrix2c {
        let theta = self.axis_deg.to_radians();
        let (s, co) = theta.sin_cos();
        let rot = Matrix2c::new(c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0));
        let half = self.retardance / 2.0;
        let phase = Matrix2c::new(
            C64::from_polar(1.0, -half),
            c(0.0, 0.0),
            c(0.0, 0.0),
            C64::from_polar(1.0, half),
        );
        rot * phase * rot.transpose()
    }
}

/// One optical element ahead of the analyzing PBS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ChainElement {
    /// A passive wave plate.
    Fixed { retardance: f64, axis_deg: f64 },
    /// The electro-optic modulator: a retarder whose retardance is the drive
    /// fraction times a quarter wave.
    Eom { axis_deg: f64 },
}

impl ChainElement {
    pub fn retarder(&self, drive: f64) -> Retarder {
        match *self {
            ChainElement::Fixed { retardance, axis_deg } => Retarder { retardance, axis_deg },
            ChainElement::Eom { axis_deg } => Retarder {
                retardance: drive * FRAC_PI_2,
                axis_deg,
            },
        }
    }
}

/// Ordered retarders followed by a PBS, with the analyzer imperfections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementChain {
    pub elements: Vec<ChainElement>,
    /// PBS extinction ratio `r` in `r:1`; `inf` for a perfect splitter.
    pub pbs_extinction: f64,
    /// EOM extinction ratio, applied only while the EOM is driven.
    pub eom_extinction: f64,
    /// EOM drive as a fraction of the quarter-wave voltage, in `[-1, 1]`.
    #[serde(default)]
    pub drive: f64,
}

impl MeasurementChain {
    pub fn new(elements: Vec<ChainElement>, pbs_extinction: f64, eom_extinction: f64) -> Result<Self> {
        let chain = Self { elements, pbs_extinction, eom_extinction, drive: 0.0 };
        chain.validate()?;
        Ok(chain)
    }

    /// RTP EOM with its axis at 45°: identity at zero drive, a QWP at 45°
    /// at quarter-wave voltage.
    pub fn vienna() -> Self {
        Self {
            elements: vec![ChainElement::Eom { axis_deg: 45.0 }],
            pbs_extinction: 180.0,
            eom_extinction: 250.0,
            drive: 0.0,
        }
    }

    /// A QWP at 22.5° followed by an EOM at 22.5°: `−QV` cancels the plate,
    /// `+QV` completes a HWP at 22.5°.
    pub fn canaries() -> Self {
        Self {
            elements: vec![
                ChainElement::Fixed { retardance: FRAC_PI_2, axis_deg: 22.5 },
                ChainElement::Eom { axis_deg: 22.5 },
            ],
            pbs_extinction: 180.0,
            eom_extinction: 250.0,
            drive: -1.0,
        }
    }

    /// Same chain, perfect PBS and EOM.
    pub fn perfect(mut self) -> Self {
        self.pbs_extinction = f64::INFINITY;
        self.eom_extinction = f64::INFINITY;
        self
    }

    pub fn with_drive(&self, drive: f64) -> Self {
        Self { drive, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        // NaN fails both comparisons.
        if !(self.pbs_extinction > 1.0) || !(self.eom_extinction > 1.0) {
            return domain("extinction ratios must exceed 1");
        }
        if !(-1.0..=1.0).contains(&self.drive) {
            return domain(format!("EOM drive {} outside [-1, 1]", self.drive));
        }
        for el in &self.elements {
            if let ChainElement::Fixed { retardance, axis_deg } = el {
                if !retardance.is_finite() || !axis_deg.is_finite() {
                    return domain("retarder parameters must be finite");
                }
            }
        }
        Ok(())
    }

    /// Total Jones matrix, elements applied in the order the light meets them.
    pub fn jones(&self) -> Matrix2c {
        self.elements
            .iter()
            .fold(Matrix2c::identity(), |acc, el| el.retarder(self.drive).jones() * acc)
    }

    pub fn eom_driven(&self) -> bool {
        self.drive != 0.0 && self.elements.iter().any(|e| matches!(e, ChainElement::Eom { .. }))
    }

    /// Net contrast `ε = ∏ (r−1)/(r+1)` of the analyzer: PBS always, EOM
    /// while driven.
    pub fn contrast(&self) -> f64 {
        let mut eps = extinction_contrast(self.pbs_extinction);
        if self.eom_driven() {
            eps *= extinction_contrast(self.eom_extinction);
        }
        eps
    }

    /// Effective POVM elements for the plus and minus ports, including
    /// extinction leakage.
    pub fn effects(&self) -> (Matrix2c, Matrix2c) {
        let basis = chain_basis(self);
        let (p, m) = (basis.plus_projector(), basis.minus_projector());
        let keep = (1.0 + self.contrast()) / 2.0;
        let leak = 1.0 - keep;
        (p * c(keep, 0.0) + m * c(leak, 0.0), m * c(keep, 0.0) + p * c(leak, 0.0))
    }
}

/// `(r−1)/(r+1)`: the fraction of polarization contrast surviving an
/// analyzer that leaks `1/(r+1)` into the wrong port.
pub fn extinction_contrast(ratio: f64) -> f64 {
    if ratio.is_infinite() {
        1.0
    } else {
        (ratio - 1.0) / (ratio + 1.0)
    }
}

/// The polarization basis actually analyzed: the PBS eigenstates pulled back
/// through the retarder chain, `J†|H⟩` and `J†|V⟩`.
pub fn chain_basis(chain: &MeasurementChain) -> PolarizationBasis {
    let j_adj = chain.jones().adjoint();
    let hv = PolarizationBasis::horizontal_vertical();
    PolarizationBasis {
        plus: j_adj * hv.plus,
        minus: j_adj * hv.minus,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vienna_undriven_is_hv() {
        let b = chain_basis(&MeasurementChain::vienna());
        assert!(b.same_as(&PolarizationBasis::horizontal_vertical(), 1e-12));
    }

    #[test]
    fn vienna_quarter_voltage_is_circular() {
        let b = chain_basis(&MeasurementChain::vienna().with_drive(1.0));
        assert!(b.same_as(&PolarizationBasis::right_left(), 1e-12));
    }

    #[test]
    fn canaries_settings() {
        let chain = MeasurementChain::canaries();
        let off = chain_basis(&chain.with_drive(-1.0));
        assert!(off.same_as(&PolarizationBasis::horizontal_vertical(), 1e-12));
        let on = chain_basis(&chain.with_drive(1.0));
        assert!(on.same_as(&PolarizationBasis::diagonal(), 1e-12));
    }

    #[test]
    fn contrast_composition() {
        let chain = MeasurementChain::vienna();
        assert!((chain.contrast() - 179.0 / 181.0).abs() < 1e-15);
        let on = chain.with_drive(1.0);
        assert!((on.contrast() - 179.0 / 181.0 * 249.0 / 251.0).abs() < 1e-15);
        assert_eq!(MeasurementChain::vienna().perfect().with_drive(1.0).contrast(), 1.0);
    }

    #[test]
    fn effects_sum_to_identity() {
        let (p, m) = MeasurementChain::canaries().with_drive(0.3).effects();
        assert!(((p + m) - Matrix2c::identity()).norm() < 1e-12);
    }

    #[test]
    fn rejects_bad_chain() {
        let mut chain = MeasurementChain::vienna();
        chain.pbs_extinction = 1.0;
        assert!(chain.validate().is_err());
        assert!(MeasurementChain::vienna().with_drive(1.5).validate().is_err());
    }
}
