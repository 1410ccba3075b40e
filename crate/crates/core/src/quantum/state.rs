//! The imperfect hybrid path–polarization state.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex;

use crate::error::{domain, Result};

pub type C64 = Complex<f64>;
pub type Matrix2c = Matrix2<C64>;
pub type Matrix4c = Matrix4<C64>;

/// Index of `|a,H⟩` in the ordered basis `{aH, aV, bH, bV}` (path ⊗ polarization).
pub const A_H: usize = 0;
pub const A_V: usize = 1;
pub const B_H: usize = 2;
pub const B_V: usize = 3;

/// Density operator of the system-path ⊗ environment-polarization pair.
///
/// The two visibility parameters fix the state completely: `v_hv` sets the
/// bit-error fraction of the path/polarization correlation and `v_coh` the
/// magnitude of the `aH ↔ bV` coherence that carries the erasable
/// interference.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridState {
    rho: Matrix4c,
    v_hv: f64,
    v_coh: f64,
}

impl HybridState {
    pub fn new(v_hv: f64, v_coh: f64) -> Result<Self> {
        for (name, v) in [("v_hv", v_hv), ("v_coh", v_coh)] {
            if !(0.0..=1.0).contains(&v) {
                return domain(format!("{name} = {v} outside [0, 1]"));
            }
        }
        // The aH/bV block has eigenvalues (1 + v_hv)/4 ± v_coh/2.
        if v_coh > (1.0 + v_hv) / 2.0 + 1e-15 {
            return domain(format!("v_coh = {v_coh} too large for v_hv = {v_hv}: state not positive"));
        }
        let mut rho = Matrix4c::zeros();
        let correlated = (1.0 + v_hv) / 4.0;
        let anticorrelated = (1.0 - v_hv) / 4.0;
        rho[(A_H, A_H)] = correlated.into();
        rho[(B_V, B_V)] = correlated.into();
        rho[(A_V, A_V)] = anticorrelated.into();
        rho[(B_H, B_H)] = anticorrelated.into();
        rho[(A_H, B_V)] = (v_coh / 2.0).into();
        rho[(B_V, A_H)] = (v_coh / 2.0).into();
        Ok(Self { rho, v_hv, v_coh })
    }

    /// The pure state `(|aH⟩ + |bV⟩)/√2`.
    pub fn ideal() -> Self {
        Self::new(1.0, 1.0).expect("unit visibilities are in range")
    }

    pub fn rho(&self) -> &Matrix4c {
        &self.rho
    }

    pub fn v_hv(&self) -> f64 {
        self.v_hv
    }

    pub fn v_coh(&self) -> f64 {
        self.v_coh
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }

    /// Largest element-wise deviation of `ρ` from `ρ†`.
    pub fn hermiticity_defect(&self) -> f64 {
        (self.rho - self.rho.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.rho)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Expectation of `(|a⟩⟨a| − |b⟩⟨b|) ⊗ (|H⟩⟨H| − |V⟩⟨V|)`.
    pub fn hv_correlation(&self) -> f64 {
        let p = |i: usize| self.rho[(i, i)].re;
        p(A_H) - p(A_V) - p(B_H) + p(B_V)
    }

    /// The `aH ↔ bV` coherence element.
    pub fn coherence(&self) -> C64 {
        self.rho[(A_H, B_V)]
    }

    /// Probability `tr(ρ · (Πs ⊗ Πe))` for a path-space effect `Πs` and a
    /// polarization-space effect `Πe`.
    pub fn expectation(&self, system: &Matrix2c, environment: &Matrix2c) -> f64 {
        let op: Matrix4c = system.kronecker(environment);
        (self.rho * op).trace().re
    }
}

/// Builds the imperfect hybrid state from its two measured visibilities.
pub fn make_hybrid_state(v_hv: f64, v_coh: f64) -> Result<HybridState> {
    HybridState::new(v_hv, v_coh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_state_is_pure() {
        let s = make_hybrid_state(1.0, 1.0).unwrap();
        assert!((s.purity() - 1.0).abs() < 1e-12);
        assert!((s.rho()[(A_H, B_V)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn vienna_visibilities() {
        let s = make_hybrid_state(0.98, 0.969).unwrap();
        assert!((s.coherence().re - 0.4845).abs() < 1e-15);
        assert!((s.hv_correlation() - 0.98).abs() < 1e-12);
        assert!((s.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn incoherent_mixture() {
        let s = make_hybrid_state(1.0, 0.0).unwrap();
        assert_eq!(s.coherence(), C64::new(0.0, 0.0));
        assert!((s.purity() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(make_hybrid_state(1.01, 0.5).is_err());
        assert!(make_hybrid_state(0.5, -0.1).is_err());
        assert!(make_hybrid_state(f64::NAN, 0.5).is_err());
    }
}
