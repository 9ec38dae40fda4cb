//! Safe corridors: overlapping convex free regions in half-space form, plus the
//! assignment of trajectory states to regions.
//!
//! Regions are grown as axis-aligned boxes of free cells on the inflated grid, so no
//! occupied cell center ever lies strictly inside one. A new box is started whenever a
//! state leaves the current box, and it is always seeded with the previous state so
//! that the last state of each region also lies in the next one.

use std::ops::Range;

use serde::Serialize;

use crate::error::CorridorError;
use crate::grid::{Cell, OccupancyGrid};
use crate::path::CoarsePath;

/// Convex polygon `{p : A p <= b}` with unit-norm rows of `A`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HPolygon {
    normals: Vec<[f64; 2]>,
    offsets: Vec<f64>,
}

impl HPolygon {
    /// Builds a polygon from half-spaces `n·p <= c`, normalizing each row.
    ///
    /// Returns `None` when a normal is degenerate, or the region is empty or unbounded.
    pub fn new(rows: impl IntoIterator<Item = ([f64; 2], f64)>) -> Option<Self> {
        let mut normals = Vec::new();
        let mut offsets = Vec::new();
        for (n, c) in rows {
            let norm = n[0].hypot(n[1]);
            if !(norm > 1e-12) || !c.is_finite() {
                return None;
            }
            normals.push([n[0] / norm, n[1] / norm]);
            offsets.push(c / norm);
        }
        let poly = Self { normals, offsets };
        (poly.is_bounded() && !poly.vertices().is_empty()).then_some(poly)
    }

    /// Axis-aligned box `[min_x, max_x] × [min_y, max_y]`.
    pub fn from_box(min: [f64; 2], max: [f64; 2]) -> Self {
        assert!(min[0] < max[0] && min[1] < max[1], "degenerate box");
        Self {
            normals: vec![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]],
            offsets: vec![max[0], max[1], -min[0], -min[1]],
        }
    }

    pub fn normals(&self) -> &[[f64; 2]] {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Number of half-spaces.
    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    /// Signed distance of `p` past each half-space boundary.
    pub fn residuals(&self, p: [f64; 2]) -> impl Iterator<Item = f64> + '_ {
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(move |(n, c)| n[0] * p[0] + n[1] * p[1] - c)
    }

    /// Largest half-space residual; non-positive inside the polygon.
    pub fn violation(&self, p: [f64; 2]) -> f64 {
        self.residuals(p).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, p: [f64; 2], slack: f64) -> bool {
        debug_assert!(slack >= 0.0);
        self.residuals(p).all(|r| r <= slack)
    }

    fn is_bounded(&self) -> bool {
        if self.normals.len() < 3 {
            return false;
        }
        let mut angles: Vec<f64> = self.normals.iter().map(|n| n[1].atan2(n[0])).collect();
        angles.sort_by(f64::total_cmp);
        let wrap_gap = angles[0] + std::f64::consts::TAU - angles[angles.len() - 1];
        let max_gap = angles
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(wrap_gap, f64::max);
        max_gap < std::f64::consts::PI - 1e-12
    }

    /// Polygon vertices in counter-clockwise order.
    pub fn vertices(&self) -> Vec<[f64; 2]> {
        let mut pts: Vec<[f64; 2]> = Vec::new();
        let m = self.normals.len();
        for a in 0..m {
            for b in a + 1..m {
                let (n1, n2) = (self.normals[a], self.normals[b]);
                let det = n1[0] * n2[1] - n1[1] * n2[0];
                if det.abs() < 1e-12 {
                    continue;
                }
                let (c1, c2) = (self.offsets[a], self.offsets[b]);
                let p = [
                    (c1 * n2[1] - c2 * n1[1]) / det,
                    (n1[0] * c2 - n2[0] * c1) / det,
                ];
                if self.contains(p, 1e-9)
                    && !pts
                        .iter()
                        .any(|q| (q[0] - p[0]).abs() < 1e-9 && (q[1] - p[1]).abs() < 1e-9)
                {
                    pts.push(p);
                }
            }
        }
        if pts.len() < 3 {
            return pts;
        }
        let cx = pts.iter().map(|p| p[0]).sum::<f64>() / pts.len() as f64;
        let cy = pts.iter().map(|p| p[1]).sum::<f64>() / pts.len() as f64;
        pts.sort_by(|p, q| {
            (p[1] - cy)
                .atan2(p[0] - cx)
                .total_cmp(&(q[1] - cy).atan2(q[0] - cx))
        });
        pts
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corridor {
    polygons: Vec<HPolygon>,
    assignment: Vec<Range<usize>>,
}

impl Corridor {
    /// Pairs polygons with contiguous, covering state ranges.
    pub fn new(polygons: Vec<HPolygon>, assignment: Vec<Range<usize>>) -> Self {
        assert_eq!(polygons.len(), assignment.len());
        assert!(!assignment.is_empty());
        assert_eq!(assignment[0].start, 0);
        for w in assignment.windows(2) {
            assert_eq!(w[0].end, w[1].start, "assignment must be contiguous");
        }
        assert!(assignment.iter().all(|r| !r.is_empty()), "empty polygon");
        Self {
            polygons,
            assignment,
        }
    }

    /// A single polygon holding all `states` states.
    pub fn single(polygon: HPolygon, states: usize) -> Self {
        Self::new(vec![polygon], vec![0..states])
    }

    /// The corridor of states `from..`, renumbered from zero.
    pub fn tail(&self, from: usize) -> Corridor {
        assert!(from < self.state_count());
        let (polygons, assignment) = self
            .polygons
            .iter()
            .zip(&self.assignment)
            .filter(|(_, r)| r.end > from)
            .map(|(p, r)| (p.clone(), r.start.max(from) - from..r.end - from))
            .unzip();
        Corridor::new(polygons, assignment)
    }

    pub fn polygons(&self) -> &[HPolygon] {
        &self.polygons
    }

    /// State index range held by each polygon.
    pub fn assignment(&self) -> &[Range<usize>] {
        &self.assignment
    }

    pub fn state_count(&self) -> usize {
        self.assignment.last().map_or(0, |r| r.end)
    }

    /// Polygon holding state `k`.
    pub fn polygon_of(&self, k: usize) -> usize {
        self.assignment
            .iter()
            .position(|r| r.contains(&k))
            .expect("state index outside corridor")
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct PolygonView<'a> {
            a: &'a [[f64; 2]],
            b: &'a [f64],
            vertices: Vec<[f64; 2]>,
            states: [usize; 2],
        }
        let polygons: Vec<PolygonView> = self
            .polygons
            .iter()
            .zip(&self.assignment)
            .map(|(p, r)| PolygonView {
                a: p.normals(),
                b: p.offsets(),
                vertices: p.vertices(),
                states: [r.start, r.end - 1],
            })
            .collect();
        serde_json::json!({ "polygons": polygons })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorridorParams {
    /// Side length (m) at which boxes stop growing. A box seeded around two states and
    /// their front discs can start out larger.
    pub max_side: f64,
    /// Front disc offset used to seed boxes around both disc centers (m).
    pub disc_offset: f64,
}

impl Default for CorridorParams {
    fn default() -> Self {
        Self {
            max_side: 10.0,
            disc_offset: 1.2,
        }
    }
}

/// Inclusive cell ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct CellBox {
    i0: usize,
    i1: usize,
    j0: usize,
    j1: usize,
}

impl CellBox {
    fn around(cells: &[Cell]) -> Self {
        let mut b = CellBox {
            i0: usize::MAX,
            i1: 0,
            j0: usize::MAX,
            j1: 0,
        };
        for c in cells {
            b.i0 = b.i0.min(c.i);
            b.i1 = b.i1.max(c.i);
            b.j0 = b.j0.min(c.j);
            b.j1 = b.j1.max(c.j);
        }
        b
    }

    fn contains(&self, c: Cell) -> bool {
        (self.i0..=self.i1).contains(&c.i) && (self.j0..=self.j1).contains(&c.j)
    }

    fn is_free(&self, grid: &OccupancyGrid) -> bool {
        (self.j0..=self.j1).all(|j| (self.i0..=self.i1).all(|i| !grid.cell_occupied(Cell::new(i, j))))
    }

    fn to_polygon(self, grid: &OccupancyGrid) -> HPolygon {
        let res = grid.resolution();
        let o = grid.origin();
        HPolygon::from_box(
            [o[0] + self.i0 as f64 * res, o[1] + self.j0 as f64 * res],
            [
                o[0] + (self.i1 + 1) as f64 * res,
                o[1] + (self.j1 + 1) as f64 * res,
            ],
        )
    }

    /// Greedy growth one cell at a time, cycling through +x, +y, -x, -y.
    fn grow(mut self, grid: &OccupancyGrid, max_cells: usize) -> Self {
        let row_free = |j: usize, i0: usize, i1: usize| {
            (i0..=i1).all(|i| !grid.cell_occupied(Cell::new(i, j)))
        };
        let col_free = |i: usize, j0: usize, j1: usize| {
            (j0..=j1).all(|j| !grid.cell_occupied(Cell::new(i, j)))
        };
        let mut blocked = [false; 4];
        while !blocked.iter().all(|&b| b) {
            for dir in 0..4 {
                if blocked[dir] {
                    continue;
                }
                let wide = self.i1 - self.i0 + 1 >= max_cells;
                let tall = self.j1 - self.j0 + 1 >= max_cells;
                let grown = match dir {
                    0 if !wide && self.i1 + 1 < grid.width() && col_free(self.i1 + 1, self.j0, self.j1) => {
                        self.i1 += 1;
                        true
                    }
                    1 if !tall && self.j1 + 1 < grid.height() && row_free(self.j1 + 1, self.i0, self.i1) => {
                        self.j1 += 1;
                        true
                    }
                    2 if !wide && self.i0 > 0 && col_free(self.i0 - 1, self.j0, self.j1) => {
                        self.i0 -= 1;
                        true
                    }
                    3 if !tall && self.j0 > 0 && row_free(self.j0 - 1, self.i0, self.i1) => {
                        self.j0 -= 1;
                        true
                    }
                    _ => false,
                };
                blocked[dir] = !grown;
            }
        }
        self
    }
}

/// Builds the corridor along `path`, whose poses become the trajectory states.
pub fn build_corridor(
    grid: &OccupancyGrid,
    path: &CoarsePath,
    params: &CorridorParams,
) -> Result<Corridor, CorridorError> {
    let poses = path.poses();
    if poses.is_empty() {
        return Err(CorridorError::EmptyPath);
    }
    let max_cells = ((params.max_side / grid.resolution()) + 1e-9).floor().max(1.0) as usize;
    let failure = |k: usize| CorridorError::NoFreePolygon {
        index: k,
        x: poses[k].x,
        y: poses[k].y,
    };
    let rear_cell = |k: usize| grid.world_to_cell(poses[k].position());
    let front_cell = |k: usize| grid.world_to_cell(poses[k].front(params.disc_offset));

    // Box around the given states; front discs are included when that keeps the box free.
    let seed = |states: &[usize]| -> Option<CellBox> {
        let rear: Option<Vec<Cell>> = states.iter().map(|&k| rear_cell(k)).collect();
        let rear = rear?;
        let with_front: Option<Vec<Cell>> = states
            .iter()
            .map(|&k| front_cell(k))
            .chain(rear.iter().map(|&c| Some(c)))
            .collect();
        if let Some(cells) = with_front {
            let b = CellBox::around(&cells);
            if b.is_free(grid) {
                return Some(b);
            }
        }
        let b = CellBox::around(&rear);
        b.is_free(grid).then_some(b)
    };

    let mut current = seed(&[0]).ok_or_else(|| failure(0))?.grow(grid, max_cells);
    let mut boxes = vec![current];
    let mut starts = vec![0usize];
    for k in 1..poses.len() {
        let rear_in = rear_cell(k).is_some_and(|c| current.contains(c));
        let front_in = current
            .to_polygon(grid)
            .contains(poses[k].front(params.disc_offset), 0.0);
        if rear_in && front_in {
            continue;
        }
        let next = match seed(&[k - 1, k]) {
            Some(b) if rear_in => {
                // Only worth a new box if it also takes in the front disc.
                let grown = b.grow(grid, max_cells);
                if !grown
                    .to_polygon(grid)
                    .contains(poses[k].front(params.disc_offset), 0.0)
                {
                    continue;
                }
                grown
            }
            Some(b) => b.grow(grid, max_cells),
            None if rear_in => continue,
            None => return Err(failure(k)),
        };
        current = next;
        boxes.push(current);
        starts.push(k);
    }

    let polygons = boxes.iter().map(|b| b.to_polygon(grid)).collect();
    let mut assignment: Vec<Range<usize>> = starts.windows(2).map(|w| w[0]..w[1]).collect();
    assignment.push(*starts.last().unwrap()..poses.len());
    Ok(Corridor::new(polygons, assignment))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::Pose;

    fn unit_square() -> HPolygon {
        HPolygon::from_box([0.0, 0.0], [1.0, 1.0])
    }

    #[test]
    fn contains_examples() {
        let sq = unit_square();
        assert!(sq.contains([0.5, 0.5], 0.0));
        assert!(!sq.contains([1.5, 0.5], 0.0));
        assert!(sq.contains([1.05, 0.5], 0.1));
        assert!(!sq.contains([1.05, 0.5], 0.0));
    }

    #[test]
    fn general_polygon_normalizes_and_validates() {
        let tri = HPolygon::new([([0.0, -2.0], 0.0), ([-3.0, 0.0], 0.0), ([1.0, 1.0], 1.0)]).unwrap();
        for n in tri.normals() {
            assert!((n[0].hypot(n[1]) - 1.0).abs() < 1e-12);
        }
        assert_eq!(tri.vertices().len(), 3);
        assert!(tri.contains([0.25, 0.25], 0.0));
        // Unbounded strip and empty region.
        assert!(HPolygon::new([([1.0, 0.0], 1.0), ([-1.0, 0.0], 0.0), ([0.0, 1.0], 1.0)]).is_none());
        assert!(HPolygon::new([
            ([1.0, 0.0], -1.0),
            ([-1.0, 0.0], -1.0),
            ([0.0, 1.0], 1.0),
            ([0.0, -1.0], 1.0)
        ])
        .is_none());
    }

    #[test]
    fn tail_renumbers_and_drops_passed_polygons() {
        let boxes: Vec<HPolygon> = (0..3).map(|i| HPolygon::from_box([i as f64, 0.0], [i as f64 + 1.5, 1.0])).collect();
        let c = Corridor::new(boxes.clone(), vec![0..3, 3..5, 5..9]);
        let t = c.tail(4);
        assert_eq!(t.assignment(), &[0..1, 1..5]);
        assert_eq!(t.polygons(), &boxes[1..]);
        assert_eq!(c.tail(0), c);
        assert_eq!(c.tail(8).assignment(), &[0..1]);
    }

    #[test]
    fn box_vertices_are_ccw() {
        let v = HPolygon::from_box([1.0, 2.0], [3.0, 5.0]).vertices();
        assert_eq!(v, vec![[1.0, 2.0], [3.0, 2.0], [3.0, 5.0], [1.0, 5.0]]);
    }

    fn line_path(points: &[[f64; 2]]) -> CoarsePath {
        CoarsePath::new(
            points
                .windows(2)
                .map(|w| Pose::forward(w[0][0], w[0][1], (w[1][1] - w[0][1]).atan2(w[1][0] - w[0][0])))
                .chain(std::iter::once(Pose::forward(
                    points[points.len() - 1][0],
                    points[points.len() - 1][1],
                    0.0,
                )))
                .collect(),
        )
    }

    fn check_invariants(grid: &OccupancyGrid, path: &CoarsePath, c: &Corridor) {
        assert_eq!(c.state_count(), path.len());
        for (poly, range) in c.polygons().iter().zip(c.assignment()) {
            for k in range.clone() {
                assert!(poly.contains(path.poses()[k].position(), 0.0), "state {k}");
            }
            for n in poly.normals() {
                assert!((n[0].hypot(n[1]) - 1.0).abs() < 1e-9);
            }
            for j in 0..grid.height() {
                for i in 0..grid.width() {
                    let cell = Cell::new(i, j);
                    if grid.cell_occupied(cell) {
                        assert!(poly.violation(grid.cell_to_world(cell)) >= 0.0);
                    }
                }
            }
        }
        for (i, w) in c.assignment().windows(2).enumerate() {
            let junction = path.poses()[w[0].end - 1].position();
            assert!(c.polygons()[i + 1].contains(junction, 0.0));
        }
    }

    #[test]
    fn free_map_is_one_polygon() {
        let grid = OccupancyGrid::new(100, 100, 0.1, [0.0, 0.0]).unwrap();
        let path = line_path(&[[1.0, 1.0], [3.0, 2.0], [5.0, 5.0], [8.0, 8.0]]);
        let c = build_corridor(&grid, &path, &CorridorParams::default()).unwrap();
        assert_eq!(c.polygons().len(), 1);
        assert_eq!(c.assignment(), &[0..4]);
        let v = c.polygons()[0].vertices();
        assert!((v[0][0]).abs() < 1e-9 && (v[2][0] - 10.0).abs() < 1e-9);
        check_invariants(&grid, &path, &c);
    }

    /// Two 5 m rooms separated by a wall at x in [5, 5.5) with a 1 m door at y in [2, 3).
    fn two_rooms() -> OccupancyGrid {
        let mut g = OccupancyGrid::new(21, 10, 0.5, [0.0, 0.0]).unwrap();
        for j in 0..10 {
            if !(4..6).contains(&j) {
                g.set_occupied(Cell::new(10, j), true);
            }
        }
        g
    }

    #[test]
    fn door_is_covered_by_overlap() {
        let grid = two_rooms();
        let path = line_path(&[
            [1.0, 4.0],
            [2.5, 3.5],
            [4.0, 2.6],
            [5.25, 2.5],
            [6.5, 2.6],
            [8.0, 3.5],
            [9.5, 4.0],
        ]);
        let params = CorridorParams {
            disc_offset: 0.0,
            ..Default::default()
        };
        let c = build_corridor(&grid, &path, &params).unwrap();
        assert!(c.polygons().len() >= 2);
        check_invariants(&grid, &path, &c);

        // Some polygon spans the whole passage.
        assert!(c
            .polygons()
            .iter()
            .any(|p| p.contains([5.0, 2.0], 0.0) && p.contains([5.5, 3.0], 0.0)));

        // Sample each consecutive intersection: it must be free, and one of them must reach
        // the door mouth (the passage plus one cell on either side).
        let mut door_hit = false;
        for w in c.polygons().windows(2) {
            let mut samples = 0;
            for a in 0..=200 {
                for b in 0..=100 {
                    let p = [a as f64 * 0.05 + 0.01, b as f64 * 0.05 + 0.01];
                    if w[0].contains(p, 0.0) && w[1].contains(p, 0.0) {
                        samples += 1;
                        assert!(!grid.is_occupied(p));
                        door_hit |= (4.5..6.0).contains(&p[0]) && (2.0..3.0).contains(&p[1]);
                    }
                }
            }
            assert!(samples > 0, "consecutive polygons must overlap");
        }
        assert!(door_hit);
    }

    #[test]
    fn boundary_separates_point_from_adjacent_obstacle() {
        let mut grid = OccupancyGrid::new(20, 20, 0.5, [0.0, 0.0]).unwrap();
        let blocked = Cell::new(6, 4);
        grid.set_occupied(blocked, true);
        // (2.75, 2.25) sits in cell (5, 4), right next to the obstacle.
        let path = line_path(&[[2.75, 2.25], [2.75, 5.0]]);
        let params = CorridorParams {
            disc_offset: 0.0,
            ..Default::default()
        };
        let c = build_corridor(&grid, &path, &params).unwrap();
        let poly = &c.polygons()[c.polygon_of(0)];
        assert!(poly.contains([2.75, 2.25], 0.0));
        let center = grid.cell_to_world(blocked);
        assert!(poly.residuals(center).any(|r| r >= 0.0));
        check_invariants(&grid, &path, &c);
    }

    #[test]
    fn state_in_obstacle_fails() {
        let mut grid = OccupancyGrid::new(10, 10, 0.5, [0.0, 0.0]).unwrap();
        grid.set_occupied(Cell::new(5, 5), true);
        let path = line_path(&[[1.0, 1.0], [2.75, 2.75]]);
        let err = build_corridor(&grid, &path, &CorridorParams::default()).unwrap_err();
        assert!(matches!(err, CorridorError::NoFreePolygon { index: 1, .. }));
    }

    #[test]
    fn json_lists_vertices_and_state_ranges() {
        let grid = two_rooms();
        let path = line_path(&[[1.0, 2.5], [4.0, 2.5], [6.0, 2.5], [9.0, 2.5]]);
        let c = build_corridor(&grid, &path, &CorridorParams::default()).unwrap();
        let json = c.to_json();
        let polys = json["polygons"].as_array().unwrap();
        assert_eq!(polys.len(), c.polygons().len());
        assert_eq!(polys[0]["states"][0], 0);
        assert_eq!(polys[0]["vertices"].as_array().unwrap().len(), 4);
    }
}
