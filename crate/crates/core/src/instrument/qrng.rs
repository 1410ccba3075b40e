use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::QrngConfig;
use crate::error::{Error, Result};

/// A timed sequence of QRNG bits: bit `k` is produced at `k · period` and
/// acts on the modulator from `k · period + latency`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QrngBits {
    period_ps: u64,
    latency_ps: u64,
    len: usize,
    words: Vec<u64>,
}

impl QrngBits {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn period_s(&self) -> f64 {
        self.period_ps as f64 * 1e-12
    }

    pub fn latency_s(&self) -> f64 {
        self.latency_ps as f64 * 1e-12
    }

    pub fn get(&self, k: usize) -> bool {
        assert!(k < self.len, "bit {k} of {}", self.len);
        self.words[k / 64] >> (k % 64) & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|k| self.get(k))
    }

    pub fn ones(&self) -> usize {
        let full = self.len / 64;
        let mut n: usize = self.words[..full].iter().map(|w| w.count_ones() as usize).sum();
        if !self.len.is_multiple_of(64) {
            n += (self.words[full] & ((1u64 << (self.len % 64)) - 1)).count_ones() as usize;
        }
        n
    }

    /// Index of the bit in force on the modulator at time `t_ps`, and the
    /// time elapsed since it took effect. `None` outside the sequence.
    pub fn slot_at(&self, t_ps: u64) -> Option<(usize, u64)> {
        let since = t_ps.checked_sub(self.latency_ps)?;
        let k = (since / self.period_ps) as usize;
        (k < self.len).then_some((k, since % self.period_ps))
    }

    /// Time span covered by [`slot_at`](Self::slot_at), `[start, end)` in ps.
    pub fn span_ps(&self) -> (u64, u64) {
        (self.latency_ps, self.latency_ps + self.len as u64 * self.period_ps)
    }
}

/// Prefix XOR of the bits of `x`, least significant first.
fn prefix_xor(mut x: u64) -> u64 {
    x ^= x << 1;
    x ^= x << 2;
    x ^= x << 4;
    x ^= x << 8;
    x ^= x << 16;
    x ^= x << 32;
    x
}

/// Generates `⌈duration / period⌉` bits of a balanced two-state Markov chain
/// with autocorrelation `exp(−lag/τ)`.
///
/// Each step flips the bit with probability `(1 − q)/2`, `q = exp(−period/τ)`.
/// A flip is drawn as a fair coin vetoed by a rare `Bernoulli(q)` event, so
/// whole 64-bit words come from one random draw and the veto positions are
/// found by geometric skipping.
pub fn qrng_stream_with_rng<R: Rng + ?Sized>(cfg: &QrngConfig, period_s: f64, duration_s: f64, rng: &mut R) -> Result<QrngBits> {
    cfg.validate()?;
    if !(duration_s > 0.0) || !(period_s > 0.0) {
        return Err(Error::Domain(format!("qrng duration {duration_s} s and period {period_s} s must be positive")));
    }
    let period_ps = (period_s * 1e12).round().max(1.0) as u64;
    let len = (duration_s * 1e12 / period_ps as f64).ceil() as usize;
    let q = if cfg.autocorrelation_time_s > 0.0 { (-period_s / cfg.autocorrelation_time_s).exp() } else { 0.0 };
    let nwords = len.div_ceil(64);
    let mut flips: Vec<u64> = (0..nwords).map(|_| rng.next_u64()).collect();
    if q > 0.0 {
        let mut k = 0usize;
        loop {
            if q < 1.0 {
                let u = 1.0 - rng.random::<f64>();
                k = k.saturating_add((u.ln() / (-q).ln_1p()).floor() as usize);
            }
            if k >= len {
                break;
            }
            flips[k / 64] &= !(1u64 << (k % 64));
            k += 1;
        }
    }
    // Bit 0 is a fair coin; afterwards bit k = bit k−1 XOR flip k.
    flips[0] = (flips[0] & !1) | (rng.next_u64() & 1);
    let mut carry = 0u64;
    for w in flips.iter_mut() {
        let x = prefix_xor(*w);
        *w = if carry == 1 { !x } else { x };
        carry = *w >> 63;
    }
    Ok(QrngBits { period_ps, latency_ps: (cfg.latency_s * 1e12).round() as u64, len, words: flips })
}

/// [`qrng_stream_with_rng`] seeded from `cfg.seed` (0 when unset).
pub fn qrng_stream(cfg: &QrngConfig, period_s: f64, duration_s: f64) -> Result<QrngBits> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
    qrng_stream_with_rng(cfg, period_s, duration_s, &mut rng)
}

/// Sample autocorrelation of the ±1 sequence at `lag` bits.
pub fn autocorrelation(bits: &QrngBits, lag: usize) -> f64 {
    let n = bits.len();
    assert!(lag < n);
    let s: Vec<f64> = bits.iter().map(|b| if b { 1.0 } else { -1.0 }).collect();
    let mean = s.iter().sum::<f64>() / n as f64;
    let var = s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    let cov = (0..n - lag).map(|k| (s[k] - mean) * (s[k + lag] - mean)).sum::<f64>() / (n - lag) as f64;
    cov / var
}
