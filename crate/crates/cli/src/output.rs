//! CSV, JSON and SVG rendering. Floats use the shortest representation that round-trips.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::Serialize;

use refraction_billiards::return_map::{FreeFallSample, OrbitRecord};
use refraction_billiards::scan::{GridCell, GridSpec};

use crate::svg::{color, Plot};

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv<const N: usize>(
    header: [&str; N],
    rows: impl IntoIterator<Item = [String; N]>,
) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// One row per iterate. An orbit that fails on its first step gets a single `iter = 0` row
/// holding the seed, so its termination is still reported.
pub fn orbits_csv(records: &[OrbitRecord]) -> anyhow::Result<String> {
    let rows = records.iter().enumerate().flat_map(|(id, rec)| {
        let term = rec.termination.as_str();
        let states: Vec<(usize, f64, f64)> = if rec.states.is_empty() {
            vec![(0, rec.seed.xi, rec.seed.alpha)]
        } else {
            rec.states
                .iter()
                .enumerate()
                .map(|(k, s)| (k + 1, s.xi, s.alpha))
                .collect()
        };
        states.into_iter().map(move |(k, xi, alpha)| {
            [
                id.to_string(),
                k.to_string(),
                num(xi),
                num(alpha),
                term.to_string(),
            ]
        })
    });
    csv(["orbit_id", "iter", "xi", "alpha", "termination"], rows)
}

pub fn scan_csv(cells: &[GridCell]) -> anyhow::Result<String> {
    let rows = cells.iter().map(|c| {
        [
            num(c.x),
            num(c.y),
            opt(c.delta0),
            opt(c.delta1),
            c.sign0.to_string(),
            c.sign1.to_string(),
        ]
    });
    csv(["x", "y", "delta0", "delta1", "sign0", "sign1"], rows)
}

pub fn freefall_csv(samples: &[FreeFallSample]) -> anyhow::Result<String> {
    let rows = samples
        .iter()
        .map(|s| [num(s.theta), num(s.delta), s.clamped.to_string()]);
    csv(["theta", "delta", "clamped"], rows)
}

pub fn json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn portrait_svg(records: &[OrbitRecord]) -> String {
    let alpha = Plot::range_of(
        records
            .iter()
            .flat_map(|r| r.states.iter().map(|s| s.alpha)),
    );
    let mut plot = Plot::new("phase portrait", "xi", "alpha", (0.0, TAU), alpha);
    for (i, rec) in records.iter().enumerate() {
        let pts: Vec<(f64, f64)> = rec.states.iter().map(|s| (s.xi, s.alpha)).collect();
        plot.points(&pts, color(i), 0.8);
    }
    plot.render()
}

pub fn freefall_svg(samples: &[FreeFallSample]) -> String {
    let delta = Plot::range_of(samples.iter().map(|s| s.delta));
    let mut plot = Plot::new(
        "free-fall deflection",
        "theta",
        "delta",
        (0.0, FRAC_PI_2),
        delta,
    );
    plot.hline(0.0);
    let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.theta, s.delta)).collect();
    plot.polyline(&pts, color(0));
    plot.render()
}

/// Major-axis sign map: red saddle, blue centre, grey degenerate or inadmissible.
pub fn scan_svg(spec: &GridSpec, cells: &[GridCell]) -> String {
    let dx = (spec.x_range.1 - spec.x_range.0) / (spec.nx.max(2) - 1) as f64;
    let dy = (spec.y_range.1 - spec.y_range.0) / (spec.ny.max(2) - 1) as f64;
    let x = (spec.x_range.0 - dx / 2.0, spec.x_range.1 + dx / 2.0);
    let y = (spec.y_range.0 - dy / 2.0, spec.y_range.1 + dy / 2.0);
    let label = |p| {
        serde_json::to_value(p)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default()
    };
    let mut plot = Plot::new(
        "sign of the major-axis discriminant",
        &label(spec.x_param),
        &label(spec.y_param),
        x,
        y,
    );
    for c in cells {
        let fill = match c.sign0 {
            1 => "#d62728",
            -1 => "#1f77b4",
            _ => "#cccccc",
        };
        plot.cell(c.x, c.y, dx, dy, fill);
    }
    plot.render()
}
