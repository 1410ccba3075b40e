use std::io::Write;

use super::stream::{seconds_to_ps, TimeTag, TimeTagStream};
use crate::error::{Error, Result};

/// A matched pair: indices into the two streams and `Δt = t_a − t_b` in ps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Coincidence {
    pub a: usize,
    pub b: usize,
    pub dt_ps: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceSet {
    pub pairs: Vec<Coincidence>,
    /// Full width.
    pub window_ps: u64,
    pub offset_ps: i64,
}

impl CoincidenceSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn window_s(&self) -> f64 {
        self.window_ps as f64 * 1e-12
    }

    pub fn offset_s(&self) -> f64 {
        self.offset_ps as f64 * 1e-12
    }

    /// Pairs resolved to the tags they point at.
    pub fn resolve<'s>(
        &'s self,
        a: &'s TimeTagStream,
        b: &'s TimeTagStream,
    ) -> impl Iterator<Item = (&'s TimeTag, &'s TimeTag, i64)> + 's {
        self.pairs.iter().map(move |p| (&a.tags()[p.a], &b.tags()[p.b], p.dt_ps))
    }

    /// CSV with one row per pair, system tag first. `a` and `b` must be the
    /// streams the set was built from.
    pub fn write_csv<W: Write>(&self, a: &TimeTagStream, b: &TimeTagStream, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t_sys_ps,t_env_ps,dt_ps,ch_sys,ch_env,eom_bit,scanner_step")?;
        let swapped = a.side() != super::Side::System;
        for (ta, tb, dt) in self.resolve(a, b) {
            let (s, e, dt) = if swapped { (tb, ta, -dt) } else { (ta, tb, dt) };
            let eom = e.eom_bit.map_or_else(|| "-".into(), |v| v.to_string());
            let step = s.scanner_step.map_or_else(|| "-".into(), |v| v.to_string());
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                s.time_ps,
                e.time_ps,
                dt,
                s.channel.number(),
                e.channel.number(),
                eom,
                step
            )?;
        }
        w.flush()
    }
}

fn check_sorted(tags: &[TimeTag], name: &str) -> Result<()> {
    match tags.windows(2).position(|w| w[1].time_ps < w[0].time_ps) {
        Some(k) => Err(Error::Data(format!("stream {name} unsorted at index {}", k + 1))),
        None => Ok(()),
    }
}

/// Greedy nearest-match coincidences between two tag lists.
///
/// `(i, j)` is a candidate iff `|t_a[i] − t_b[j] − offset| ≤ window/2`.
/// Candidates are accepted in order of increasing `|t_a − t_b − offset|`,
/// ties going to the earlier pair; each tag is used at most once.
pub fn match_tags(a: &[TimeTag], b: &[TimeTag], window_ps: u64, offset_ps: i64) -> Result<CoincidenceSet> {
    if window_ps == 0 {
        return Err(Error::Domain("coincidence window must be positive".into()));
    }
    check_sorted(a, "a")?;
    check_sorted(b, "b")?;
    // Compare 2·(t_a − t_b − offset) against the full width to stay in integers.
    let w = window_ps as i128;
    let off = offset_ps as i128;
    let mut cands: Vec<(u128, i128, usize, usize)> = Vec::new();
    let mut lo = 0;
    for (i, ta) in a.iter().enumerate() {
        let ta = ta.time_ps as i128;
        while lo < b.len() && 2 * (ta - b[lo].time_ps as i128 - off) > w {
            lo += 1;
        }
        let mut j = lo;
        while j < b.len() {
            let d2 = 2 * (ta - b[j].time_ps as i128 - off);
            if d2 < -w {
                break;
            }
            cands.push((d2.unsigned_abs(), 2 * ta - d2, i, j));
            j += 1;
        }
    }
    // Second key is t_a + t_b − offset, which orders ties by time in a way
    // that survives swapping the streams.
    cands.sort_unstable();
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut pairs = Vec::new();
    for (_, _, i, j) in cands {
        if used_a[i] || used_b[j] {
            continue;
        }
        used_a[i] = true;
        used_b[j] = true;
        pairs.push(Coincidence { a: i, b: j, dt_ps: a[i].time_ps as i64 - b[j].time_ps as i64 });
    }
    pairs.sort_unstable_by_key(|p| (p.a, p.b));
    Ok(CoincidenceSet { pairs, window_ps, offset_ps })
}

/// [`match_tags`] on two sealed streams, with window and offset in seconds.
pub fn find_coincidences(a: &TimeTagStream, b: &TimeTagStream, window_s: f64, offset_s: f64) -> Result<CoincidenceSet> {
    if !(window_s > 0.0) || !offset_s.is_finite() {
        return Err(Error::Domain(format!("window {window_s} s must be positive, offset finite")));
    }
    match_tags(a.tags(), b.tags(), seconds_to_ps(window_s).max(1) as u64, seconds_to_ps(offset_s))
}
