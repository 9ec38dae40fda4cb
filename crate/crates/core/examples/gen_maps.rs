//! Regenerates the shipped scenario maps and the default config next to them.
//!
//! ```text
//! cargo run -p nhplan --example gen_maps -- scenarios
//! ```

use std::path::PathBuf;

use nhplan::grid::{Cell, OccupancyGrid};
use nhplan::optimizer::PlannerConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RES: f64 = 0.2;

struct Canvas {
    grid: OccupancyGrid,
}

impl Canvas {
    fn new(width_m: f64, height_m: f64) -> Self {
        let w = (width_m / RES).round() as usize;
        let h = (height_m / RES).round() as usize;
        let mut c = Self {
            grid: OccupancyGrid::new(w, h, RES, [0.0, 0.0]).unwrap(),
        };
        // Outer wall, one cell thick.
        c.rect(0.0, 0.0, width_m, RES);
        c.rect(0.0, height_m - RES, width_m, height_m);
        c.rect(0.0, 0.0, RES, height_m);
        c.rect(width_m - RES, 0.0, width_m, height_m);
        c
    }

    fn fill(&mut self, inside: impl Fn(f64, f64) -> bool) {
        for j in 0..self.grid.height() {
            for i in 0..self.grid.width() {
                let cell = Cell::new(i, j);
                let [x, y] = self.grid.cell_to_world(cell);
                if inside(x, y) {
                    self.grid.set_occupied(cell, true);
                }
            }
        }
    }

    fn rect(&mut self, x0: f64, y0: f64, x1: f64, y1: f64) {
        self.fill(|x, y| x >= x0 && x <= x1 && y >= y0 && y <= y1);
    }

    fn disc(&mut self, cx: f64, cy: f64, r: f64) {
        self.fill(|x, y| (x - cx).hypot(y - cy) <= r);
    }

    /// Convex polygon given counter-clockwise.
    fn polygon(&mut self, pts: &[[f64; 2]]) {
        let pts = pts.to_vec();
        self.fill(move |x, y| {
            (0..pts.len()).all(|k| {
                let a = pts[k];
                let b = pts[(k + 1) % pts.len()];
                (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]) >= 0.0
            })
        });
    }
}

/// Two long walls with alternating gaps make a three-lane switchback.
fn maze() -> OccupancyGrid {
    let mut c = Canvas::new(30.0, 30.0);
    c.rect(0.0, 10.0, 21.0, 10.6);
    c.rect(9.0, 20.0, 30.0, 20.6);
    c.rect(11.0, 2.5, 13.0, 5.5);
    c.rect(14.0, 13.5, 16.5, 16.5);
    c.rect(19.0, 24.5, 20.5, 27.0);
    c.grid
}

/// Three rows of parked cars and two aisles, with one slot of the top row left open.
fn parking() -> OccupancyGrid {
    let mut c = Canvas::new(48.0, 30.0);
    let open = (2, 7);
    for (row, y0, y1) in [(0usize, 0.0, 4.7), (1, 12.0, 18.0), (2, 25.3, 30.0)] {
        for slot in 0..12 {
            if (row, slot) == open {
                continue;
            }
            let x0 = 8.0 + slot as f64 * 3.0;
            c.rect(x0 + 0.5, y0, x0 + 2.5, y1);
        }
    }
    c.grid
}

/// Scattered discs and convex blobs; positions are fixed by the seed.
fn irregular() -> OccupancyGrid {
    let mut c = Canvas::new(60.0, 40.0);
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let keep_clear: [[f64; 2]; 2] = [[4.0, 4.0], [56.0, 35.0]];
    let mut placed = 0;
    while placed < 26 {
        let cx: f64 = rng.random_range(6.0..54.0);
        let cy: f64 = rng.random_range(4.0..36.0);
        if keep_clear.iter().any(|p| (p[0] - cx).hypot(p[1] - cy) < 7.0) {
            continue;
        }
        if rng.random_bool(0.5) {
            c.disc(cx, cy, rng.random_range(0.8..2.0));
        } else {
            let r = rng.random_range(1.0..2.4);
            let phase: f64 = rng.random_range(0.0..1.0);
            let sides = rng.random_range(3..7);
            let pts: Vec<[f64; 2]> = (0..sides)
                .map(|k| {
                    let a = std::f64::consts::TAU * (k as f64 + phase) / sides as f64;
                    [cx + r * a.cos(), cy + r * a.sin()]
                })
                .collect();
            c.polygon(&pts);
        }
        placed += 1;
    }
    c.grid
}

/// A road with a closed bay off its upper side; the goal faces out of the bay.
fn bay() -> OccupancyGrid {
    let mut c = Canvas::new(24.0, 16.0);
    c.rect(0.0, 8.0, 10.0, 16.0);
    c.rect(14.0, 8.0, 24.0, 16.0);
    c.grid
}

/// A wide hall with a pillar row that forces a heading sweep across ±π.
fn seam() -> OccupancyGrid {
    let mut c = Canvas::new(30.0, 16.0);
    c.rect(12.0, 0.0, 13.0, 4.5);
    c.grid
}

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "scenarios".into()));
    std::fs::create_dir_all(&dir).unwrap();
    for (name, grid) in [
        ("maze", maze()),
        ("parking", parking()),
        ("irregular", irregular()),
        ("bay", bay()),
        ("seam", seam()),
    ] {
        let path = dir.join(format!("{name}.grid"));
        std::fs::write(&path, grid.to_text()).unwrap();
        println!("{} {}x{}", path.display(), grid.width(), grid.height());
    }
    std::fs::write(dir.join("default.cfg"), PlannerConfig::default().to_text()).unwrap();
}
