//! Lab geometry, signal delays, and the event regions they imply.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::event::{ExtendedEvent, Relation, SpacetimeEvent, GUIDED_SPEED, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

/// Propagation medium of a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Medium {
    Fiber,
    Coax,
    FreeSpace,
}

impl Medium {
    pub fn speed(self) -> f64 {
        match self {
            Medium::Fiber | Medium::Coax => GUIDED_SPEED,
            Medium::FreeSpace => SPEED_OF_LIGHT,
        }
    }
}

/// A signal path: either a physical length in a medium, or an explicit
/// delay (electronics, delay cards).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub medium: Option<Medium>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub lab: String,
    /// Time expression, e.g. `"sys_delay + interferometer"` or `"-54ns"`.
    pub start: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedRelation {
    pub pair: [String; 2],
    pub relation: Relation,
}

/// Scenario file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Lab name → x coordinate in meters (labs are collinear).
    pub labs: BTreeMap<String, f64>,
    #[serde(default)]
    pub segments: BTreeMap<String, SegmentSpec>,
    pub events: BTreeMap<String, EventSpec>,
    #[serde(default)]
    pub expect: Vec<ExpectedRelation>,
}

macro_rules! bundled {
    ($($name:literal => $file:literal),* $(,)?) => {
        /// Names of the scenarios shipped with the crate.
        pub const BUNDLED_SCENARIOS: &[&str] = &[$($name),*];

        fn bundled_source(name: &str) -> Option<&'static str> {
            match name {
                $($name => Some(include_str!(concat!("../../configs/scenarios/", $file))),)*
                _ => None,
            }
        }
    };
}

bundled! {
    "vienna-I" => "vienna-I.toml",
    "vienna-II" => "vienna-II.toml",
    "vienna-III" => "vienna-III.toml",
    "vienna-IV" => "vienna-IV.toml",
    "vienna-V" => "vienna-V.toml",
    "vienna-VI" => "vienna-VI.toml",
    "canaries-II" => "canaries-II.toml",
    "canaries-II'" => "canaries-IIp.toml",
    "canaries-III" => "canaries-III.toml",
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn bundled(name: &str) -> Result<Self> {
        let src = bundled_source(name).ok_or_else(|| {
            Error::Config(format!(
                "unknown scenario {name:?}; available: {}",
                BUNDLED_SCENARIOS.join(", ")
            ))
        })?;
        Self::parse(src)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }
}

/// Resolved geometry: labs, segment delays, and event regions.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioGeometry {
    pub name: String,
    pub labs: BTreeMap<String, [f64; 3]>,
    /// Segment name → delay in seconds.
    pub delays: BTreeMap<String, f64>,
    pub events: BTreeMap<String, ExtendedEvent>,
    pub c: f64,
    pub expected: Vec<ExpectedRelation>,
}

impl ScenarioGeometry {
    pub fn event(&self, label: &str) -> Result<&ExtendedEvent> {
        self.events
            .get(label)
            .ok_or_else(|| Error::Config(format!("scenario {} defines no event {label}", self.name)))
    }

    pub fn emission_time(&self) -> Result<f64> {
        Ok(self.event("E_se")?.start_time())
    }

    /// Emission to the system photon's exit from the interferometer, where
    /// it is detected.
    pub fn system_detection_delay(&self) -> Result<f64> {
        Ok(self.event("I_s")?.end_time() - self.emission_time()?)
    }

    /// Emission to the environment photon's polarization projection.
    pub fn environment_detection_delay(&self) -> Result<f64> {
        Ok(self.event("P_e")?.start_time() - self.emission_time()?)
    }

    /// With the event geometry rebuilt after moving one event in time.
    pub fn with_shifted_event(&self, label: &str, dt: f64) -> Result<Self> {
        let ev = self.event(label)?;
        let samples = ev
            .samples()
            .iter()
            .map(|s| SpacetimeEvent::new(s.label.clone(), s.position, s.time + dt))
            .collect();
        let mut out = self.clone();
        out.events.insert(label.to_string(), ExtendedEvent::new(label, samples)?);
        Ok(out)
    }
}

fn parse_literal(token: &str) -> Option<f64> {
    let units: [(&str, f64); 6] = [("ps", 1e-12), ("ns", 1e-9), ("us", 1e-6), ("µs", 1e-6), ("ms", 1e-3), ("s", 1.0)];
    for (suffix, scale) in units {
        if let Some(num) = token.strip_suffix(suffix) {
            if let Ok(v) = num.trim().parse::<f64>() {
                return Some(v * scale);
            }
        }
    }
    // A bare zero is the only unitless literal.
    token.parse::<f64>().ok().filter(|v| *v == 0.0)
}

/// Evaluates a `+`/`-` separated sum of segment names and literals with units.
pub fn eval_time_expr(expr: &str, delays: &BTreeMap<String, f64>) -> Result<f64> {
    let mut total = 0.0;
    let mut sign = 1.0;
    let mut expect_term = true;
    let mut chars = expr.trim().char_indices().peekable();
    while let Some(&(i, ch)) = chars.peek() {
        match ch {
            ' ' => {
                chars.next();
            }
            '+' | '-' => {
                chars.next();
                if ch == '-' {
                    sign = -sign;
                }
                expect_term = true;
            }
            _ => {
                if !expect_term {
                    return Err(Error::Config(format!("missing operator in time expression {expr:?}")));
                }
                let start = i;
                let mut end = expr.trim().len();
                while let Some(&(j, c)) = chars.peek() {
                    if c == '+' || c == ' ' || (c == '-' && j > start) {
                        end = j;
                        break;
                    }
                    chars.next();
                }
                let token = &expr.trim()[start..end];
                let value = match parse_literal(token) {
                    Some(v) => v,
                    None => *delays.get(token).ok_or_else(|| {
                        Error::Config(format!("time expression {expr:?} references undefined segment {token:?}"))
                    })?,
                };
                total += sign * value;
                sign = 1.0;
                expect_term = false;
            }
        }
    }
    if expect_term {
        return Err(Error::Config(format!("incomplete time expression {expr:?}")));
    }
    Ok(total)
}

/// Resolves segment delays and places every event at its lab.
pub fn build_scenario(config: &ScenarioConfig) -> Result<ScenarioGeometry> {
    let mut delays = BTreeMap::new();
    for (name, seg) in &config.segments {
        let delay = match (seg.length_m, seg.medium, &seg.delay) {
            (_, _, Some(expr)) => eval_time_expr(expr, &BTreeMap::new())?,
            (Some(len), Some(medium), None) => len / medium.speed(),
            _ => {
                return Err(Error::Config(format!(
                    "segment {name} needs either `delay` or both `length_m` and `medium`"
                )))
            }
        };
        if !(delay >= 0.0) {
            return Err(Error::Config(format!("segment {name} has negative delay")));
        }
        delays.insert(name.clone(), delay);
    }
    let labs: BTreeMap<String, [f64; 3]> = config
        .labs
        .iter()
        .map(|(k, &x)| (k.clone(), [x, 0.0, 0.0]))
        .collect();
    let mut events = BTreeMap::new();
    for (label, spec) in &config.events {
        let position = *labs
            .get(&spec.lab)
            .ok_or_else(|| Error::Config(format!("event {label} placed at undeclared lab {}", spec.lab)))?;
        let start = eval_time_expr(&spec.start, &delays)?;
        let end = match &spec.end {
            Some(e) => eval_time_expr(e, &delays)?,
            None => start,
        };
        if end < start {
            return Err(Error::Config(format!("event {label} ends before it starts")));
        }
        events.insert(label.clone(), ExtendedEvent::duration(label.clone(), position, start, end));
    }
    Ok(ScenarioGeometry {
        name: config.name.clone(),
        labs,
        delays,
        events,
        c: SPEED_OF_LIGHT,
        expected: config.expect.clone(),
    })
}
