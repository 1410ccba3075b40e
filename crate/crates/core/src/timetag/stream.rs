use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Detector channel. Det1/Det2 watch the interferometer outputs, Det3/Det4
/// the transmitted and reflected ports of the environment PBS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Channel {
    Det1 = 1,
    Det2 = 2,
    Det3 = 3,
    Det4 = 4,
}

impl Channel {
    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Channel::Det1),
            2 => Some(Channel::Det2),
            3 => Some(Channel::Det3),
            4 => Some(Channel::Det4),
            _ => None,
        }
    }

    pub fn side(self) -> Side {
        match self {
            Channel::Det1 | Channel::Det2 => Side::System,
            Channel::Det3 | Channel::Det4 => Side::Environment,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    System,
    Environment,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::System => "system",
            Side::Environment => "environment",
        }
    }
}

/// One detection as logged by a time-tagging unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeTag {
    /// Local-clock time in picoseconds.
    pub time_ps: u64,
    pub channel: Channel,
    /// EOM status (1 = switched, 0 = idle); `None` while settling.
    pub eom_bit: Option<u8>,
    pub qrng_bit: Option<u8>,
    pub scanner_step: Option<u32>,
}

impl TimeTag {
    pub fn system(time_ps: u64, channel: Channel, scanner_step: u32) -> Self {
        Self { time_ps, channel, eom_bit: None, qrng_bit: None, scanner_step: Some(scanner_step) }
    }

    pub fn environment(time_ps: u64, channel: Channel, eom_bit: Option<u8>, qrng_bit: u8) -> Self {
        Self { time_ps, channel, eom_bit, qrng_bit: Some(qrng_bit), scanner_step: None }
    }

    /// A tag with no annotations.
    pub fn bare(time_ps: u64, channel: Channel) -> Self {
        Self { time_ps, channel, eom_bit: None, qrng_bit: None, scanner_step: None }
    }
}

/// How the two sites' time bases are tied together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Discipline {
    /// Common 10 MHz generator: fixed offset, no drift.
    SharedGenerator,
    /// GPS-disciplined: a random-walk wander of scale `wander_sigma_s` per
    /// second, re-zeroed at every 1 Hz sync mark.
    Gps { wander_sigma_s: f64 },
}

impl Discipline {
    pub fn name(&self) -> &'static str {
        match self {
            Discipline::SharedGenerator => "shared-generator",
            Discipline::Gps { .. } => "gps",
        }
    }
}

/// Local clock of one time-tagging unit relative to lab time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockModel {
    pub offset_s: f64,
    /// Fractional rate error.
    #[serde(default)]
    pub drift: f64,
    #[serde(default)]
    pub jitter_sigma_s: f64,
    pub discipline: Discipline,
}

impl Default for ClockModel {
    fn default() -> Self {
        Self { offset_s: 0.0, drift: 0.0, jitter_sigma_s: 0.0, discipline: Discipline::SharedGenerator }
    }
}

impl ClockModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.jitter_sigma_s >= 0.0) || !self.offset_s.is_finite() || !self.drift.is_finite() {
            return Err(Error::Config("clock jitter must be ≥ 0 and offset/drift finite".into()));
        }
        if let Discipline::Gps { wander_sigma_s } = self.discipline {
            if !(wander_sigma_s >= 0.0) {
                return Err(Error::Config("GPS wander must be ≥ 0".into()));
            }
        }
        Ok(())
    }
}

/// A sealed, time-ordered log from one side.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTagStream {
    side: Side,
    clock: ClockModel,
    tags: Vec<TimeTag>,
}

impl TimeTagStream {
    pub fn new(side: Side, clock: ClockModel, tags: Vec<TimeTag>) -> Result<Self> {
        if let Some(k) = tags.windows(2).position(|w| w[1].time_ps < w[0].time_ps) {
            return Err(Error::Data(format!("tags out of order at index {}", k + 1)));
        }
        if let Some(t) = tags.iter().find(|t| t.channel.side() != side) {
            return Err(Error::Data(format!("channel {:?} on the {} side", t.channel, side.as_str())));
        }
        Ok(Self { side, clock, tags })
    }

    /// Sorts by time (stable) before sealing.
    pub fn from_unsorted(side: Side, clock: ClockModel, mut tags: Vec<TimeTag>) -> Result<Self> {
        tags.sort_by_key(|t| t.time_ps);
        Self::new(side, clock, tags)
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn clock(&self) -> &ClockModel {
        &self.clock
    }

    pub fn tags(&self) -> &[TimeTag] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn into_tags(self) -> Vec<TimeTag> {
        self.tags
    }

    /// Span from first to last tag, seconds.
    pub fn span_s(&self) -> f64 {
        match (self.tags.first(), self.tags.last()) {
            (Some(a), Some(b)) => (b.time_ps - a.time_ps) as f64 * 1e-12,
            _ => 0.0,
        }
    }

    /// Tags inside `[from_ps, to_ps)`, as a new stream.
    pub fn window(&self, from_ps: u64, to_ps: u64) -> Self {
        let lo = self.tags.partition_point(|t| t.time_ps < from_ps);
        let hi = self.tags.partition_point(|t| t.time_ps < to_ps);
        Self { side: self.side, clock: self.clock, tags: self.tags[lo..hi].to_vec() }
    }
}

/// Seconds to integer picoseconds, rounded to nearest.
pub fn seconds_to_ps(s: f64) -> i64 {
    (s * 1e12).round() as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsorted_and_wrong_side() {
        let tags = vec![TimeTag::bare(10, Channel::Det1), TimeTag::bare(5, Channel::Det2)];
        assert!(matches!(
            TimeTagStream::new(Side::System, ClockModel::default(), tags.clone()),
            Err(Error::Data(_))
        ));
        let sorted = TimeTagStream::from_unsorted(Side::System, ClockModel::default(), tags).unwrap();
        assert_eq!(sorted.tags()[0].time_ps, 5);
        let wrong = vec![TimeTag::bare(1, Channel::Det3)];
        assert!(TimeTagStream::new(Side::System, ClockModel::default(), wrong).is_err());
    }

    #[test]
    fn window_slices() {
        let tags = (0..10).map(|k| TimeTag::bare(k * 100, Channel::Det3)).collect();
        let s = TimeTagStream::new(Side::Environment, ClockModel::default(), tags).unwrap();
        assert_eq!(s.window(150, 450).len(), 3);
    }
}
