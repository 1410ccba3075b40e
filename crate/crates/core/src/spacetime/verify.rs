//! Relation matrices and checks against the published scenario tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::event::{min_required_signal_speed, relate_extended, Relation};
use super::scenario::ScenarioGeometry;
use crate::error::{Error, Result};

/// The event pairs each published table row covers.
pub const TABLE_PAIRS: [(&str, &str); 3] = [("P_e", "I_s"), ("I_s", "C_e"), ("E_se", "C_e")];

/// Pairwise relations. Inserting `(A, B)` also records the inverse for
/// `(B, A)`, so the matrix is antisymmetric by construction.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RelationMatrix {
    entries: BTreeMap<(String, String), Relation>,
}

impl RelationMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, a: &str, b: &str, relation: Relation) {
        self.entries.insert((a.to_string(), b.to_string()), relation);
        self.entries.insert((b.to_string(), a.to_string()), relation.inverse());
    }

    pub fn get(&self, a: &str, b: &str) -> Option<Relation> {
        self.entries.get(&(a.to_string(), b.to_string())).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Expectations declared in a scenario file.
    pub fn from_expected(geometry: &ScenarioGeometry) -> Self {
        let mut m = Self::new();
        for e in &geometry.expected {
            m.insert(&e.pair[0], &e.pair[1], e.relation);
        }
        m
    }

    /// Relations actually realized by the geometry, for every event pair.
    pub fn computed(geometry: &ScenarioGeometry) -> Self {
        let mut m = Self::new();
        let labels: Vec<&String> = geometry.events.keys().collect();
        for (i, a) in labels.iter().enumerate() {
            for b in &labels[i + 1..] {
                m.insert(a, b, relate_extended(&geometry.events[*a], &geometry.events[*b]));
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationCheck {
    pub a: String,
    pub b: String,
    pub expected: Relation,
    pub actual: Relation,
}

impl RelationCheck {
    pub fn passed(&self) -> bool {
        self.expected == self.actual
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub scenario: String,
    pub checks: Vec<RelationCheck>,
    /// Slowest signal from the choice to the interferometer, in units of c,
    /// when the choice precedes some interferometer sample.
    pub choice_to_interference_speed: Option<f64>,
    /// Lab-frame delay of the choice after the end of the interference.
    pub choice_after_interference_s: Option<f64>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(RelationCheck::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RelationCheck> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario {}", self.scenario);
        for c in &self.checks {
            let _ = writeln!(
                out,
                "  {:<4} {:<9} {:<4}  expected {:<9}  {}",
                c.a,
                c.actual.as_str(),
                c.b,
                c.expected.as_str(),
                if c.passed() { "PASS" } else { "FAIL" }
            );
        }
        if let Some(v) = self.choice_to_interference_speed {
            let _ = writeln!(out, "  required signal speed C_e -> I_s: {v:.2} c");
        }
        if let Some(dt) = self.choice_after_interference_s {
            let _ = writeln!(out, "  C_e after I_s (lab frame): {:.1} us", dt * 1e6);
        }
        let _ = writeln!(out, "  {}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }

    pub fn csv_header() -> &'static str {
        "scenario,event_a,event_b,expected,actual,pass"
    }

    pub fn to_csv_rows(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                self.scenario, c.a, c.b, c.expected, c.actual, c.passed()
            );
        }
        out
    }
}

/// Recomputes the table relations from the geometry and diffs them against
/// `expected`.
pub fn verify_scenario(geometry: &ScenarioGeometry, expected: &RelationMatrix) -> Result<VerificationReport> {
    let mut checks = Vec::with_capacity(TABLE_PAIRS.len());
    for (a, b) in TABLE_PAIRS {
        let want = expected
            .get(a, b)
            .ok_or_else(|| Error::Config(format!("no expected relation for ({a}, {b}) in {}", geometry.name)))?;
        let actual = relate_extended(geometry.event(a)?, geometry.event(b)?);
        checks.push(RelationCheck { a: a.to_string(), b: b.to_string(), expected: want, actual });
    }
    let ce = geometry.event("C_e")?;
    let is = geometry.event("I_s")?;
    let speed = min_required_signal_speed(ce, is).ok();
    let lag = ce.start_time() - is.end_time();
    Ok(VerificationReport {
        scenario: geometry.name.clone(),
        checks,
        choice_to_interference_speed: speed,
        choice_after_interference_s: (lag > 0.0).then_some(lag),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::{build_scenario, ScenarioConfig, BUNDLED_SCENARIOS};

    fn geometry(name: &str) -> ScenarioGeometry {
        build_scenario(&ScenarioConfig::bundled(name).unwrap()).unwrap()
    }

    #[test]
    fn bundled_scenarios_pass() {
        for name in BUNDLED_SCENARIOS {
            let g = geometry(name);
            let report = verify_scenario(&g, &RelationMatrix::from_expected(&g)).unwrap();
            assert!(report.passed(), "{}", report.to_text());
        }
    }

    #[test]
    fn late_choice_breaks_vienna_two() {
        let g = geometry("vienna-II");
        let expected = RelationMatrix::from_expected(&g);
        // C_e at [246, 354] ns straddles the 256.8 ns light time to the source.
        let shifted = g.with_shifted_event("C_e", 300e-9).unwrap();
        let report = verify_scenario(&shifted, &expected).unwrap();
        assert!(!report.passed());
        let failed: Vec<_> = report.failures().map(|c| (c.a.as_str(), c.b.as_str(), c.actual)).collect();
        assert_eq!(failed, vec![("E_se", "C_e", Relation::Mixed)]);
        // Pushed past 257 ns + 150 ns, the choice leaves I_s's elsewhere region.
        let later = g.with_shifted_event("C_e", 500e-9).unwrap();
        let report = verify_scenario(&later, &expected).unwrap();
        assert!(report.failures().any(|c| c.a == "I_s" && c.actual == Relation::Before));
    }

    #[test]
    fn missing_expectation_is_an_error() {
        let g = geometry("vienna-II");
        assert!(verify_scenario(&g, &RelationMatrix::new()).is_err());
    }

    #[test]
    fn matrix_is_antisymmetric() {
        let m = RelationMatrix::computed(&geometry("canaries-III"));
        assert_eq!(m.get("I_s", "C_e"), Some(Relation::After));
        assert_eq!(m.get("C_e", "I_s"), Some(Relation::Before));
        assert_eq!(m.len(), 12);
    }

    #[test]
    fn canaries_derived_figures() {
        let r = verify_scenario(&geometry("canaries-II'"), &RelationMatrix::from_expected(&geometry("canaries-II'"))).unwrap();
        let v = r.choice_to_interference_speed.unwrap();
        assert!((v - 96.0).abs() < 0.05 * 96.0, "{v}");
        let r2 = verify_scenario(&geometry("canaries-II"), &RelationMatrix::from_expected(&geometry("canaries-II"))).unwrap();
        let lag = r2.choice_after_interference_s.unwrap();
        assert!((lag - 449e-6).abs() < 5e-6, "{lag}");
    }
}
