//! The system-photon Mach–Zehnder interferometer and joint outcome tables.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use super::optics::MeasurementChain;
use super::state::{HybridState, Matrix2c, C64};

/// Which interferometer arm, if any, is blocked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Blocked {
    #[default]
    None,
    PathA,
    PathB,
}

/// Relative phase `φ` (applied to path b before the beam splitter) and the
/// blocking state. The beam splitter is fixed to `(1/√2)[[1, i], [i, 1]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InterferometerConfig {
    pub phase: f64,
    pub blocked: Blocked,
}

impl InterferometerConfig {
    pub fn new(phase: f64) -> Self {
        Self { phase, blocked: Blocked::None }
    }

    pub fn blocked(blocked: Blocked) -> Self {
        Self { phase: 0.0, blocked }
    }

    /// Path-space effects `[Det1, Det2, no-click]`.
    pub fn effects(&self) -> [Matrix2c; 3] {
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let s = C64::new(FRAC_1_SQRT_2, 0.0);
        let is = C64::new(0.0, FRAC_1_SQRT_2);
        let splitter = Matrix2c::new(s, is, is, s);
        let shifter = Matrix2c::new(one, zero, zero, C64::from_polar(1.0, self.phase));
        let pass = match self.blocked {
            Blocked::None => Matrix2c::identity(),
            Blocked::PathA => Matrix2c::new(zero, zero, zero, one),
            Blocked::PathB => Matrix2c::new(one, zero, zero, zero),
        };
        let u = splitter * shifter * pass;
        let port = |k: usize| {
            let mut p = Matrix2c::zeros();
            p[(k, k)] = one;
            u.adjoint() * p * u
        };
        [port(0), port(1), Matrix2c::identity() - pass]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SystemOutcome {
    Det1,
    Det2,
    NoClick,
}

impl SystemOutcome {
    pub const ALL: [SystemOutcome; 3] = [Self::Det1, Self::Det2, Self::NoClick];
}

/// Environment-photon analyzer port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvOutcome {
    Plus,
    Minus,
}

impl EnvOutcome {
    pub const ALL: [EnvOutcome; 2] = [Self::Plus, Self::Minus];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Joint probabilities of (system outcome, environment port). Blocked
/// amplitude is accounted for in the `NoClick` row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityTable {
    p: [[f64; 2]; 3],
}

impl ProbabilityTable {
    pub fn get(&self, s: SystemOutcome, e: EnvOutcome) -> f64 {
        self.p[s as usize][e as usize]
    }

    pub fn total(&self) -> f64 {
        self.p.iter().flatten().sum()
    }

    pub fn env_marginal(&self, e: EnvOutcome) -> f64 {
        SystemOutcome::ALL.iter().map(|&s| self.get(s, e)).sum()
    }

    /// Renormalized `P(Det1 | e)` over clicking system outcomes; `None` when
    /// no coincidence is possible.
    pub fn det1_given(&self, e: EnvOutcome) -> Option<f64> {
        let d1 = self.get(SystemOutcome::Det1, e);
        let clicks = d1 + self.get(SystemOutcome::Det2, e);
        (clicks > 0.0).then(|| d1 / clicks)
    }

    /// Entries flattened in `(system, env)` row-major order.
    pub fn entries(&self) -> [((SystemOutcome, EnvOutcome), f64); 6] {
        let mut out = [((SystemOutcome::Det1, EnvOutcome::Plus), 0.0); 6];
        let mut k = 0;
        for s in SystemOutcome::ALL {
            for e in EnvOutcome::ALL {
                out[k] = ((s, e), self.get(s, e));
                k += 1;
            }
        }
        out
    }
}

/// `P(s, e) = tr(ρ · Πs ⊗ Πe)` with the analyzer effects of `chain`.
pub fn joint_probabilities(
    state: &HybridState,
    ifm: &InterferometerConfig,
    chain: &MeasurementChain,
) -> ProbabilityTable {
    let sys = ifm.effects();
    let (plus, minus) = chain.effects();
    let mut p = [[0.0; 2]; 3];
    for (row, eff) in p.iter_mut().zip(sys.iter()) {
        // Clamp round-off so every entry stays a probability.
        row[0] = state.expectation(eff, &plus).clamp(0.0, 1.0);
        row[1] = state.expectation(eff, &minus).clamp(0.0, 1.0);
    }
    ProbabilityTable { p }
}

/// `P(Det1 | port)` along a phase scan, per environment port.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalFringes {
    pub phases: Vec<f64>,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

pub fn conditional_fringes(state: &HybridState, chain: &MeasurementChain, phases: &[f64]) -> ConditionalFringes {
    let mut plus = Vec::with_capacity(phases.len());
    let mut minus = Vec::with_capacity(phases.len());
    for &phi in phases {
        let table = joint_probabilities(state, &InterferometerConfig::new(phi), chain);
        plus.push(table.det1_given(EnvOutcome::Plus).unwrap_or(f64::NAN));
        minus.push(table.det1_given(EnvOutcome::Minus).unwrap_or(f64::NAN));
    }
    ConditionalFringes { phases: phases.to_vec(), plus, minus }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use EnvOutcome::*;
    use SystemOutcome::*;

    fn rl() -> MeasurementChain {
        MeasurementChain::vienna().perfect().with_drive(1.0)
    }

    #[test]
    fn ideal_erasure_at_zero_phase() {
        let t = joint_probabilities(&HybridState::ideal(), &InterferometerConfig::new(0.0), &rl());
        assert!((t.get(Det1, Plus) - 0.5).abs() < 1e-12);
        assert!(t.get(Det2, Plus).abs() < 1e-12);
        assert!(t.get(Det1, Minus).abs() < 1e-12);
        assert!((t.get(Det2, Minus) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ideal_which_way_is_flat() {
        let chain = MeasurementChain::vienna().perfect();
        for k in 0..16 {
            let phi = k as f64 * PI / 8.0;
            let t = joint_probabilities(&HybridState::ideal(), &InterferometerConfig::new(phi), &chain);
            for s in [Det1, Det2] {
                for e in EnvOutcome::ALL {
                    assert!((t.get(s, e) - 0.25).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn blocked_b_kills_v_coincidences() {
        let chain = MeasurementChain::vienna().perfect();
        let t = joint_probabilities(&HybridState::ideal(), &InterferometerConfig::blocked(Blocked::PathB), &chain);
        assert!(t.get(Det1, Minus).abs() < 1e-12 && t.get(Det2, Minus).abs() < 1e-12);
        assert!((t.get(NoClick, Minus) - 0.5).abs() < 1e-12);
        assert!((t.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fringes_pi_shifted() {
        let f = conditional_fringes(&HybridState::ideal(), &rl(), &[0.0, PI]);
        assert!((f.plus[0] - 1.0).abs() < 1e-12 && f.minus[0].abs() < 1e-12);
        assert!(f.plus[1].abs() < 1e-12 && (f.minus[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn which_way_fringes_constant() {
        let chain = MeasurementChain::vienna().perfect();
        let phases: Vec<f64> = (0..20).map(|k| k as f64 * 0.3).collect();
        let f = conditional_fringes(&HybridState::ideal(), &chain, &phases);
        assert!(f.plus.iter().chain(&f.minus).all(|p| (p - 0.5).abs() < 1e-12));
    }
}
