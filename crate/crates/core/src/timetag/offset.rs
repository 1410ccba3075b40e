use super::stream::TimeTag;
use crate::error::{Error, Result};

/// Significance a histogram peak needs over the mean bin to count as a
/// correlation.
pub const PEAK_SIGMAS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetEstimate {
    /// Peak of `t_a − t_b`, seconds.
    pub offset_s: f64,
    /// `bin / √peak`.
    pub uncertainty_s: f64,
    pub peak_counts: u64,
    pub mean_background: f64,
}

impl OffsetEstimate {
    pub fn offset_ps(&self) -> i64 {
        (self.offset_s * 1e12).round() as i64
    }
}

/// Histogram of `t_a − t_b − center` over `[−span/2, span/2)` in bins of
/// `bin` (all picoseconds).
pub fn difference_histogram(a: &[TimeTag], b: &[TimeTag], center_ps: i64, span_ps: u64, bin_ps: u64) -> Vec<u64> {
    let nbins = (span_ps / bin_ps).max(1) as usize;
    let half = (nbins as u64 * bin_ps / 2) as i128;
    let mut hist = vec![0u64; nbins];
    let mut lo = 0;
    for ta in a {
        let ta = ta.time_ps as i128 - center_ps as i128;
        while lo < b.len() && ta - (b[lo].time_ps as i128) >= half {
            lo += 1;
        }
        for tb in &b[lo..] {
            let d = ta - tb.time_ps as i128;
            if d < -half {
                break;
            }
            hist[((d + half) / bin_ps as i128) as usize] += 1;
        }
    }
    hist
}

/// Locates the cross-correlation peak of `t_a − t_b` within `span/2` of
/// `center`.
pub fn estimate_clock_offset_near(
    a: &[TimeTag],
    b: &[TimeTag],
    center_s: f64,
    search_span_s: f64,
    bin_s: f64,
) -> Result<OffsetEstimate> {
    if !(bin_s > 0.0) || !(search_span_s >= bin_s) {
        return Err(Error::Domain(format!("need 0 < bin ({bin_s}) ≤ span ({search_span_s})")));
    }
    let bin_ps = (bin_s * 1e12).round().max(1.0) as u64;
    let span_ps = (search_span_s * 1e12).round() as u64;
    let center_ps = (center_s * 1e12).round() as i64;
    let hist = difference_histogram(a, b, center_ps, span_ps, bin_ps);
    let total: u64 = hist.iter().sum();
    let mean = total as f64 / hist.len() as f64;
    let (k, &peak) = hist
        .iter()
        .enumerate()
        .max_by_key(|&(k, &c)| (c, std::cmp::Reverse(k)))
        .expect("at least one bin");
    let sigma = mean.max(1.0).sqrt();
    if (peak as f64) < mean + PEAK_SIGMAS * sigma || peak == 0 {
        return Err(Error::NoCorrelation { peak, background: mean, sigma });
    }
    // Background-subtracted centroid over the peak bin and its neighbours.
    let (mut w, mut wx) = (0.0, 0.0);
    let lo = k.saturating_sub(1);
    for (m, &h) in hist.iter().enumerate().take(k + 2).skip(lo) {
        let c = (h as f64 - mean).max(0.0);
        w += c;
        wx += c * (m as f64 + 0.5);
    }
    let half = (hist.len() as u64 * bin_ps / 2) as f64;
    let pos_ps = wx / w * bin_ps as f64 - half + center_ps as f64;
    Ok(OffsetEstimate {
        offset_s: pos_ps * 1e-12,
        uncertainty_s: bin_s / (peak as f64).sqrt(),
        peak_counts: peak,
        mean_background: mean,
    })
}

/// [`estimate_clock_offset_near`] centred on zero.
pub fn estimate_clock_offset(a: &[TimeTag], b: &[TimeTag], search_span_s: f64, bin_s: f64) -> Result<OffsetEstimate> {
    estimate_clock_offset_near(a, b, 0.0, search_span_s, bin_s)
}

/// Expected accidental coincidence rate of two independent Poisson streams
/// under a full-width window.
pub fn accidental_rate(r1: f64, r2: f64, window_s: f64) -> f64 {
    r1 * r2 * window_s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timetag::Channel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn poisson_times(rng: &mut ChaCha8Rng, rate: f64, duration: f64) -> Vec<u64> {
        let mut t = 0.0;
        let mut out = Vec::new();
        loop {
            t += -(1.0 - rng.random::<f64>()).ln() / rate;
            if t >= duration {
                return out;
            }
            out.push((t * 1e12) as u64);
        }
    }

    fn tags(times: &[u64], ch: Channel) -> Vec<TimeTag> {
        times.iter().map(|&t| TimeTag::bare(t, ch)).collect()
    }

    #[test]
    fn recovers_injected_offset() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base = poisson_times(&mut rng, 2e4, 1.0);
        let noise = poisson_times(&mut rng, 5e4, 1.0);
        let mut a: Vec<u64> = base.iter().map(|t| t + 350_000).collect();
        a.extend(noise);
        a.sort_unstable();
        let est = estimate_clock_offset(&tags(&a, Channel::Det1), &tags(&base, Channel::Det3), 2e-6, 1e-9).unwrap();
        assert!((est.offset_s - 350e-9).abs() <= 1e-9, "{est:?}");
        assert!(est.uncertainty_s < 1e-10);
    }

    #[test]
    fn noise_has_no_peak() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = poisson_times(&mut rng, 5e4, 1.0);
        let b = poisson_times(&mut rng, 5e4, 1.0);
        let r = estimate_clock_offset(&tags(&a, Channel::Det1), &tags(&b, Channel::Det3), 2e-6, 1e-9);
        assert!(matches!(r, Err(Error::NoCorrelation { .. })), "{r:?}");
    }

    #[test]
    fn accidental_formula() {
        assert!((accidental_rate(50e3, 50e3, 1e-9) - 2.5).abs() < 1e-12);
        assert_eq!(accidental_rate(0.0, 7.0, 1e-9), 0.0);
        assert_eq!(accidental_rate(3.0, 7.0, 0.0), 0.0);
    }
}
