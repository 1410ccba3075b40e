//! Figures shared by `analyze`, `sweep` and `report`.

use std::f64::consts::TAU;

use qeraser_core::analysis::{bound_curve, ComplementarityPoint, FringeScan, VisibilityMeasurement};

use crate::svg::{Plot, Series, PALETTE};

/// Conditioned counts of both system detectors along the scan, with the
/// fitted sinusoids.
pub fn fringe_plot(scan: &FringeScan, m: &VisibilityMeasurement) -> Plot {
    let port = m.condition.port.index();
    let mut series = Vec::new();
    for (det, color) in PALETTE.iter().enumerate().take(2) {
        let pts = scan
            .points
            .iter()
            .map(|p| (p.phase, p.counts[det][port], p.variance(det, port).sqrt()))
            .collect();
        series.push(Series::markers(format!("Det{}", det + 1), color, pts));
    }
    let (lo, hi) = scan
        .points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.phase), b.max(p.phase)));
    for (det, fit) in [(0, &m.det1), (1, &m.det2)] {
        let curve = (0..=200).map(|k| {
            let phi = lo + (hi - lo) * k as f64 / 200.0;
            (phi, fit.model(phi))
        });
        series.push(Series::curve(format!("fit V={:.3}", fit.visibility.value), PALETTE[det + 2], curve));
    }
    Plot {
        title: format!(
            "Coincidences conditioned on {}{}",
            m.condition.name(),
            if m.background_subtracted { " (accidentals subtracted)" } else { "" }
        ),
        x_label: "interferometer phase φ (rad)".into(),
        y_label: "coincidences per step".into(),
        series,
        ..Plot::default()
    }
}

/// Measured `(I, V)` with the imperfect-apparatus bound and the ideal
/// circle.
pub fn complementarity_plot(points: &[ComplementarityPoint], eta_i: f64, eta_v: f64) -> Plot {
    let pts = points.iter().map(|p| (p.welcher_weg.value, p.visibility.value, p.visibility.sigma)).collect();
    let bound = (0..=400).map(|k| {
        let i = eta_i * k as f64 / 400.0;
        (i, bound_curve(i, eta_i, eta_v))
    });
    let circle = (0..=200).map(|k| {
        let a = TAU / 4.0 * k as f64 / 200.0;
        (a.cos(), a.sin())
    });
    Plot {
        title: "Complementarity: welcher-weg information vs visibility".into(),
        x_label: "I".into(),
        y_label: "V".into(),
        x_range: Some((0.0, 1.05)),
        y_range: Some((0.0, 1.05)),
        series: vec![
            Series::markers("measured", PALETTE[0], pts),
            Series::curve(format!("V = {eta_v}·√(1−(I/{eta_i})²)"), PALETTE[1], bound),
            Series::curve("I² + V² = 1", PALETTE[2], circle),
        ],
    }
}
