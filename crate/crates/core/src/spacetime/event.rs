use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Vacuum speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Signal speed in the single-mode fibre and coaxial links: 55 m take 275 ns.
pub const GUIDED_SPEED: f64 = 2.0e8;

/// Tolerance, in seconds, within which an interval counts as lightlike.
pub const LIGHTLIKE_TOLERANCE_S: f64 = 1e-12;

/// A point event in the lab frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeEvent {
    pub label: String,
    /// Meters.
    pub position: [f64; 3],
    /// Seconds.
    pub time: f64,
}

impl SpacetimeEvent {
    pub fn new(label: impl Into<String>, position: [f64; 3], time: f64) -> Self {
        Self { label: label.into(), position, time }
    }

    /// An event on the x axis.
    pub fn on_axis(label: impl Into<String>, x: f64, time: f64) -> Self {
        Self::new(label, [x, 0.0, 0.0], time)
    }

    pub fn is_finite(&self) -> bool {
        self.time.is_finite() && self.position.iter().all(|x| x.is_finite())
    }

    pub fn distance_to(&self, other: &Self) -> f64 {
        self.position
            .iter()
            .zip(other.position.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// The same event seen from a frame moving at `beta·c` along x.
    pub fn boosted_x(&self, beta: f64) -> Self {
        let gamma = 1.0 / (1.0 - beta * beta).sqrt();
        let [x, y, z] = self.position;
        let ct = SPEED_OF_LIGHT * self.time;
        Self {
            label: self.label.clone(),
            position: [gamma * (x - beta * ct), y, z],
            time: gamma * (ct - beta * x) / SPEED_OF_LIGHT,
        }
    }
}

/// Causal relation of a point pair, read as "`e1` is ... `e2`".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntervalClass {
    TimelikeBefore,
    TimelikeAfter,
    Lightlike,
    Spacelike,
}

/// Spacelike iff `|Δx| > c|Δt|`; lightlike when the two agree to within
/// [`LIGHTLIKE_TOLERANCE_S`]; otherwise timelike, ordered by the sign of
/// `Δt = t2 − t1`.
pub fn classify_interval(e1: &SpacetimeEvent, e2: &SpacetimeEvent) -> IntervalClass {
    let dt = e2.time - e1.time;
    let light_time = e1.distance_to(e2) / SPEED_OF_LIGHT;
    if (light_time - dt.abs()).abs() <= LIGHTLIKE_TOLERANCE_S {
        IntervalClass::Lightlike
    } else if light_time > dt.abs() {
        IntervalClass::Spacelike
    } else if dt > 0.0 {
        IntervalClass::TimelikeBefore
    } else {
        IntervalClass::TimelikeAfter
    }
}

/// A spacetime region represented by samples sharing one label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedEvent {
    label: String,
    samples: Vec<SpacetimeEvent>,
}

impl ExtendedEvent {
    pub fn new(label: impl Into<String>, samples: Vec<SpacetimeEvent>) -> Result<Self> {
        let label = label.into();
        if samples.is_empty() {
            return Err(Error::Config(format!("event {label} has no samples")));
        }
        if let Some(bad) = samples.iter().find(|s| s.label != label) {
            return Err(Error::Config(format!("sample labelled {} inside event {label}", bad.label)));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return domain(format!("event {label} has non-finite coordinates"));
        }
        Ok(Self { label, samples })
    }

    pub fn point(event: SpacetimeEvent) -> Self {
        Self { label: event.label.clone(), samples: vec![event] }
    }

    /// A fixed-position duration `[start, end]`, sampled at its endpoints.
    pub fn duration(label: impl Into<String>, position: [f64; 3], start: f64, end: f64) -> Self {
        let label = label.into();
        let mut samples = vec![SpacetimeEvent::new(label.clone(), position, start)];
        if end != start {
            samples.push(SpacetimeEvent::new(label.clone(), position, end));
        }
        Self { label, samples }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn samples(&self) -> &[SpacetimeEvent] {
        &self.samples
    }

    pub fn start_time(&self) -> f64 {
        self.samples.iter().map(|s| s.time).fold(f64::INFINITY, f64::min)
    }

    pub fn end_time(&self) -> f64 {
        self.samples.iter().map(|s| s.time).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Inserts `extra` evenly spaced points between consecutive samples.
    pub fn densified(&self, extra: usize) -> Self {
        let mut samples = Vec::with_capacity(self.samples.len() * (extra + 1));
        for pair in self.samples.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            for k in 0..=extra {
                let f = k as f64 / (extra + 1) as f64;
                let mut pos = [0.0; 3];
                for (i, p) in pos.iter_mut().enumerate() {
                    *p = a.position[i] + f * (b.position[i] - a.position[i]);
                }
                samples.push(SpacetimeEvent::new(self.label.clone(), pos, a.time + f * (b.time - a.time)));
            }
        }
        samples.push(self.samples.last().expect("nonempty").clone());
        Self { label: self.label.clone(), samples }
    }

    pub fn boosted_x(&self, beta: f64) -> Self {
        Self {
            label: self.label.clone(),
            samples: self.samples.iter().map(|s| s.boosted_x(beta)).collect(),
        }
    }
}

/// Relation between two extended regions, read as "`a` is ... `b`".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Before,
    After,
    Spacelike,
    /// Sample pairs disagree; reported as-is, never coerced.
    Mixed,
}

impl Relation {
    pub fn inverse(self) -> Self {
        match self {
            Relation::Before => Relation::After,
            Relation::After => Relation::Before,
            other => other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Before => "before",
            Relation::After => "after",
            Relation::Spacelike => "spacelike",
            Relation::Mixed => "mixed",
        }
    }
}

impl std::fmt::Display for Relation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Relation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "before" => Ok(Relation::Before),
            "after" => Ok(Relation::After),
            "spacelike" | "s.l." => Ok(Relation::Spacelike),
            "mixed" => Ok(Relation::Mixed),
            other => Err(Error::Config(format!("unknown relation {other:?}"))),
        }
    }
}

/// Quantifies [`classify_interval`] over every sample pair. A lightlike
/// pair counts as causally ordered by its time sign.
pub fn relate_extended(a: &ExtendedEvent, b: &ExtendedEvent) -> Relation {
    let mut all_spacelike = true;
    let mut all_before = true;
    let mut all_after = true;
    for sa in &a.samples {
        for sb in &b.samples {
            let dt = sb.time - sa.time;
            match classify_interval(sa, sb) {
                IntervalClass::Spacelike => {
                    all_before = false;
                    all_after = false;
                }
                IntervalClass::TimelikeBefore => {
                    all_spacelike = false;
                    all_after = false;
                }
                IntervalClass::TimelikeAfter => {
                    all_spacelike = false;
                    all_before = false;
                }
                IntervalClass::Lightlike => {
                    all_spacelike = false;
                    if dt <= 0.0 {
                        all_before = false;
                    }
                    if dt >= 0.0 {
                        all_after = false;
                    }
                }
            }
        }
    }
    if all_spacelike {
        Relation::Spacelike
    } else if all_before {
        Relation::Before
    } else if all_after {
        Relation::After
    } else {
        Relation::Mixed
    }
}

/// Speed, in units of c, a signal would need to get from `from` to `to`.
pub fn required_signal_speed(from: &SpacetimeEvent, to: &SpacetimeEvent) -> Result<f64> {
    let dt = to.time - from.time;
    let dx = from.distance_to(to);
    if dt <= 0.0 {
        if dx > 0.0 {
            return Err(Error::UnboundedSpeed { distance_m: dx, dt_s: dt });
        }
        return domain("events coincide or are reversed in time with no spatial separation");
    }
    Ok(dx / dt / SPEED_OF_LIGHT)
}

/// The slowest signal that connects some sample of `from` to some later
/// sample of `to`; pairs that are not time-ordered are skipped.
pub fn min_required_signal_speed(from: &ExtendedEvent, to: &ExtendedEvent) -> Result<f64> {
    let mut best: Option<f64> = None;
    for a in &from.samples {
        for b in &to.samples {
            if let Ok(v) = required_signal_speed(a, b) {
                best = Some(best.map_or(v, |x: f64| x.min(v)));
            }
        }
    }
    best.ok_or_else(|| Error::UnboundedSpeed {
        distance_m: from.samples[0].distance_to(&to.samples[0]),
        dt_s: to.start_time() - from.end_time(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const NS: f64 = 1e-9;

    #[test]
    fn colocated_ordered_events() {
        let a = SpacetimeEvent::on_axis("a", 0.0, 0.0);
        let b = SpacetimeEvent::on_axis("b", 0.0, 10.0 * NS);
        assert_eq!(classify_interval(&a, &b), IntervalClass::TimelikeBefore);
        assert_eq!(classify_interval(&b, &a), IntervalClass::TimelikeAfter);
    }

    #[test]
    fn simultaneous_separated_events() {
        let a = SpacetimeEvent::on_axis("a", 0.0, 0.0);
        let b = SpacetimeEvent::on_axis("b", 50.0, 0.0);
        assert_eq!(classify_interval(&a, &b), IntervalClass::Spacelike);
    }

    #[test]
    fn projection_against_interferometer_exit() {
        // 125 ns apart, 50 m apart: 50 m of light takes 166.8 ns.
        let pe = SpacetimeEvent::on_axis("P_e", 50.0, 275.0 * NS);
        let is = SpacetimeEvent::on_axis("I_s", 0.0, 150.0 * NS);
        assert_eq!(classify_interval(&pe, &is), IntervalClass::Spacelike);
    }

    #[test]
    fn lightlike_boundary() {
        let a = SpacetimeEvent::on_axis("a", 0.0, 0.0);
        let b = SpacetimeEvent::on_axis("b", SPEED_OF_LIGHT * 1e-6, 1e-6);
        assert_eq!(classify_interval(&a, &b), IntervalClass::Lightlike);
        assert!((required_signal_speed(&a, &b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_samples_reduce_to_points() {
        let a = SpacetimeEvent::on_axis("a", 0.0, 0.0);
        let b = SpacetimeEvent::on_axis("b", 10.0, 100.0 * NS);
        let rel = relate_extended(&ExtendedEvent::point(a.clone()), &ExtendedEvent::point(b.clone()));
        assert_eq!(classify_interval(&a, &b), IntervalClass::TimelikeBefore);
        assert_eq!(rel, Relation::Before);
    }

    #[test]
    fn overlapping_durations_are_mixed() {
        let a = ExtendedEvent::duration("a", [0.0; 3], 0.0, 10.0 * NS);
        let b = ExtendedEvent::duration("b", [0.0; 3], 5.0 * NS, 15.0 * NS);
        assert_eq!(relate_extended(&a, &b), Relation::Mixed);
    }

    #[test]
    fn signal_speed_examples() {
        let ce = SpacetimeEvent::on_axis("C_e", 144e3, 0.0);
        let is = SpacetimeEvent::on_axis("I_s", 0.0, 5e-6);
        let v = required_signal_speed(&ce, &is).unwrap();
        assert!((v - 96.07).abs() < 0.01, "{v}");
        let here = SpacetimeEvent::on_axis("x", 0.0, 1.0);
        assert_eq!(required_signal_speed(&SpacetimeEvent::on_axis("x", 0.0, 0.0), &here).unwrap(), 0.0);
        assert!(matches!(required_signal_speed(&is, &ce), Err(Error::UnboundedSpeed { .. })));
        assert!(matches!(required_signal_speed(&here, &here), Err(Error::Domain(_))));
    }

    #[test]
    fn extended_event_validation() {
        assert!(ExtendedEvent::new("x", vec![]).is_err());
        assert!(ExtendedEvent::new("x", vec![SpacetimeEvent::on_axis("y", 0.0, 0.0)]).is_err());
        let d = ExtendedEvent::duration("x", [0.0; 3], 0.0, 1.0).densified(3);
        assert_eq!(d.samples().len(), 5);
        assert_eq!(d.samples()[2].time, 0.5);
    }
}
