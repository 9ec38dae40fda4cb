//! Text artifacts of a planning run: knot and dense CSV, corridor JSON and an SVG plot.
//!
//! Floats are written with Rust's shortest round-trip formatting, so CSV values parse
//! back to the exact `f64` and the SVG polyline repeats the CSV numbers verbatim.

use std::fmt::Write;

use crate::corridor::Corridor;
use crate::grid::{Cell, OccupancyGrid};
use crate::optimizer::{DenseSample, PlannerConfig, Trajectory};
use crate::path::CoarsePath;

pub const KNOT_HEADER: &str = "k,x,y,theta,v,a,omega,t";
pub const DENSE_HEADER: &str = "time,x,y,theta,v,a,jerk,omega";

/// One row per knot. The last row's `t` is zero.
pub fn knot_csv(traj: &Trajectory) -> String {
    let mut out = String::from(KNOT_HEADER);
    out.push('\n');
    let n = traj.intervals();
    for (k, p) in traj.points().iter().enumerate() {
        let t = if k == n { 0.0 } else { p.t };
        writeln!(out, "{k},{},{},{},{},{},{},{t}", p.x, p.y, p.theta, p.v, p.a, p.omega).unwrap();
    }
    out
}

pub fn dense_csv(samples: &[DenseSample]) -> String {
    let mut out = String::from(DENSE_HEADER);
    out.push('\n');
    for s in samples {
        writeln!(out, "{},{},{},{},{},{},{},{}", s.time, s.x, s.y, s.theta, s.v, s.a, s.jerk, s.omega).unwrap();
    }
    out
}

/// Pretty-printed [`Corridor::to_json`].
pub fn corridor_json(corridor: &Corridor) -> String {
    let mut text = serde_json::to_string_pretty(&corridor.to_json()).expect("corridor serializes");
    text.push('\n');
    text
}

/// Everything drawn by [`render_svg`].
pub struct PlotInput<'a> {
    /// The raw (uninflated) map.
    pub grid: &'a OccupancyGrid,
    pub corridor: &'a Corridor,
    /// Path the optimizer was initialized from.
    pub initial: &'a CoarsePath,
    pub trajectory: &'a Trajectory,
    pub samples: &'a [DenseSample],
    pub config: &'a PlannerConfig,
}

const WIDTH: f64 = 900.0;
const MARGIN: f64 = 50.0;
const PROFILE_HEIGHT: f64 = 150.0;
const PROFILE_GAP: f64 = 40.0;

fn points_attr(points: impl IntoIterator<Item = (f64, f64)>) -> String {
    points
        .into_iter()
        .map(|(x, y)| format!("{x},{y}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Map view on top, then speed, turn-rate and acceleration profiles with their limits.
///
/// The map group maps world meters to pixels with a y flip, so its coordinates are world
/// coordinates. Elements carry ids: `obstacles`, `corridor`, `initial-path`, `trajectory`
/// and `profile-v`, `profile-omega`, `profile-a`.
pub fn render_svg(input: &PlotInput) -> String {
    let grid = input.grid;
    let [x0, y0, x1, y1] = grid.bounds();
    let scale = (WIDTH - 2.0 * MARGIN) / (x1 - x0);
    let map_h = (y1 - y0) * scale;
    let profiles_top = MARGIN + map_h + PROFILE_GAP;
    let height = profiles_top + 3.0 * (PROFILE_HEIGHT + PROFILE_GAP) + MARGIN;
    let stroke = 1.0 / scale;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<g id="map" transform="matrix({scale} 0 0 {} {} {})">"#,
        -scale,
        MARGIN - x0 * scale,
        MARGIN + y1 * scale
    )
    .unwrap();
    writeln!(
        s,
        r##"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="#888" stroke-width="{stroke}"/>"##,
        x1 - x0,
        y1 - y0
    )
    .unwrap();

    // Occupied runs of each row.
    let res = grid.resolution();
    let [ox, oy] = grid.origin();
    s.push_str("<g id=\"obstacles\" fill=\"#333\" shape-rendering=\"crispEdges\">\n");
    for j in 0..grid.height() {
        let mut i = 0;
        while i < grid.width() {
            if !grid.cell_occupied(Cell::new(i, j)) {
                i += 1;
                continue;
            }
            let start = i;
            while i < grid.width() && grid.cell_occupied(Cell::new(i, j)) {
                i += 1;
            }
            writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{}" height="{res}"/>"#,
                ox + start as f64 * res,
                oy + j as f64 * res,
                (i - start) as f64 * res
            )
            .unwrap();
        }
    }
    s.push_str("</g>\n");

    writeln!(
        s,
        r##"<g id="corridor" fill="#3a7bd5" fill-opacity="0.12" stroke="#3a7bd5" stroke-width="{stroke}">"##
    )
    .unwrap();
    for poly in input.corridor.polygons() {
        let pts = points_attr(poly.vertices().into_iter().map(|[x, y]| (x, y)));
        writeln!(s, r#"<polygon points="{pts}"/>"#).unwrap();
    }
    s.push_str("</g>\n");

    let initial = points_attr(input.initial.poses().iter().map(|p| (p.x, p.y)));
    writeln!(
        s,
        r##"<polyline id="initial-path" points="{initial}" fill="none" stroke="#999" stroke-width="{}" stroke-dasharray="{} {}"/>"##,
        2.0 * stroke,
        6.0 * stroke,
        4.0 * stroke
    )
    .unwrap();
    let traj = points_attr(input.trajectory.points().iter().map(|p| (p.x, p.y)));
    writeln!(
        s,
        r##"<polyline id="trajectory" points="{traj}" fill="none" stroke="#d62728" stroke-width="{}"/>"##,
        2.0 * stroke
    )
    .unwrap();
    for p in input.trajectory.points() {
        writeln!(s, r##"<circle cx="{}" cy="{}" r="{}" fill="#d62728"/>"##, p.x, p.y, 2.5 * stroke).unwrap();
    }
    s.push_str("</g>\n");

    let cfg = input.config;
    let samples = input.samples;
    let omega_limit: Vec<(f64, f64)> = samples.iter().map(|p| (p.time, cfg.kappa_max * p.v.abs())).collect();
    let panels: [(&str, &str, Box<dyn Fn(&DenseSample) -> f64>, Vec<Vec<(f64, f64)>>); 3] = [
        ("v", "v (m/s)", Box::new(|p| p.v), vec![]),
        (
            "omega",
            "ω (rad/s)",
            Box::new(|p| p.omega),
            vec![
                omega_limit.clone(),
                omega_limit.iter().map(|&(t, w)| (t, -w)).collect(),
            ],
        ),
        ("a", "a (m/s²)", Box::new(|p| p.a), vec![]),
    ];
    let duration = samples.last().map_or(0.0, |p| p.time).max(1e-9);
    for (idx, (id, label, value, curves)) in panels.iter().enumerate() {
        let top = profiles_top + idx as f64 * (PROFILE_HEIGHT + PROFILE_GAP);
        let limits: Vec<f64> = match *id {
            "v" => vec![cfg.v_min, cfg.v_max],
            "a" => vec![cfg.a_min, cfg.a_max],
            _ => vec![],
        };
        let mut lo = limits.iter().copied().fold(0.0f64, f64::min);
        let mut hi = limits.iter().copied().fold(0.0f64, f64::max);
        for p in samples {
            lo = lo.min(value(p));
            hi = hi.max(value(p));
        }
        for c in curves {
            for &(_, w) in c {
                lo = lo.min(w);
                hi = hi.max(w);
            }
        }
        let pad = 0.05 * (hi - lo).max(1e-6);
        let (lo, hi) = (lo - pad, hi + pad);
        let px = |t: f64| MARGIN + t / duration * (WIDTH - 2.0 * MARGIN);
        let py = |v: f64| top + (hi - v) / (hi - lo) * PROFILE_HEIGHT;

        writeln!(s, r#"<g id="profile-{id}">"#).unwrap();
        writeln!(
            s,
            r##"<rect x="{MARGIN}" y="{top}" width="{}" height="{PROFILE_HEIGHT}" fill="none" stroke="#888"/>"##,
            WIDTH - 2.0 * MARGIN
        )
        .unwrap();
        writeln!(s, r#"<text x="{}" y="{}">{label}</text>"#, MARGIN, top - 6.0).unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{duration:.2} s</text>"#,
            WIDTH - MARGIN,
            top + PROFILE_HEIGHT + 16.0
        )
        .unwrap();
        writeln!(
            s,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#bbb"/>"##,
            px(0.0),
            py(0.0),
            px(duration),
            py(0.0)
        )
        .unwrap();
        for l in &limits {
            writeln!(
                s,
                r##"<line class="limit" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#2ca02c" stroke-dasharray="6 4"/>"##,
                px(0.0),
                py(*l),
                px(duration),
                py(*l)
            )
            .unwrap();
            writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{l}</text>"#, MARGIN - 4.0, py(*l) + 4.0).unwrap();
        }
        for c in curves {
            let pts = points_attr(c.iter().map(|&(t, w)| (px(t), py(w))));
            writeln!(
                s,
                r##"<polyline class="limit" points="{pts}" fill="none" stroke="#2ca02c" stroke-dasharray="6 4"/>"##
            )
            .unwrap();
        }
        let pts = points_attr(samples.iter().map(|p| (px(p.time), py(value(p)))));
        writeln!(s, r##"<polyline points="{pts}" fill="none" stroke="#d62728" stroke-width="1.5"/>"##).unwrap();
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}
