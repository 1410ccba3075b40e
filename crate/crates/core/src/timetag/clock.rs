use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::stream::{ClockModel, Discipline};

/// Knot spacing of the GPS wander random walk.
const WANDER_KNOT_S: f64 = 1e-3;
const KNOTS_PER_SYNC: usize = 1000;

/// One realization of a [`ClockModel`] over a finite stretch of lab time.
#[derive(Debug, Clone)]
pub struct ClockRealization {
    model: ClockModel,
    /// Wander sampled every millisecond, zero at each 1 Hz sync mark.
    knots: Vec<f64>,
    jitter: Option<Normal<f64>>,
}

impl ClockRealization {
    pub fn new<R: Rng + ?Sized>(model: ClockModel, duration_s: f64, rng: &mut R) -> Self {
        let knots = match model.discipline {
            Discipline::Gps { wander_sigma_s } if wander_sigma_s > 0.0 => {
                let n = (duration_s / WANDER_KNOT_S).ceil() as usize + 2;
                let step = Normal::new(0.0, wander_sigma_s / (KNOTS_PER_SYNC as f64).sqrt())
                    .expect("finite sigma");
                let mut w = 0.0;
                (0..n)
                    .map(|k| {
                        if k % KNOTS_PER_SYNC == 0 {
                            w = 0.0;
                        } else {
                            w += step.sample(rng);
                        }
                        w
                    })
                    .collect()
            }
            _ => Vec::new(),
        };
        let jitter = (model.jitter_sigma_s > 0.0)
            .then(|| Normal::new(0.0, model.jitter_sigma_s).expect("finite sigma"));
        Self { model, knots, jitter }
    }

    pub fn model(&self) -> &ClockModel {
        &self.model
    }

    /// Deterministic part of local-minus-lab time at lab time `t`.
    pub fn offset_at(&self, t: f64) -> f64 {
        self.model.offset_s + self.model.drift * t + self.wander_at(t)
    }

    fn wander_at(&self, t: f64) -> f64 {
        if self.knots.is_empty() || t < 0.0 {
            return 0.0;
        }
        let x = t / WANDER_KNOT_S;
        let k = x.floor() as usize;
        if k + 1 >= self.knots.len() {
            return *self.knots.last().unwrap();
        }
        // The last knot before a sync mark ramps back to zero.
        let next = if (k + 1).is_multiple_of(KNOTS_PER_SYNC) { 0.0 } else { self.knots[k + 1] };
        let f = x - k as f64;
        self.knots[k] * (1.0 - f) + next * f
    }

    /// Local timestamp for a detection at lab time `t` (seconds).
    pub fn stamp<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> u64 {
        let mut local = t + self.offset_at(t);
        if let Some(j) = &self.jitter {
            local += j.sample(rng);
        }
        (local * 1e12).round().max(0.0) as u64
    }
}
