//! Lightweight hybrid-state A* over an occupancy grid.
//!
//! States keep their continuous pose but are de-duplicated on a lattice of
//! `(cell, heading bin, gear)`. Each expansion applies fixed-length arcs at five
//! curvatures in both gears. The heuristic is the larger of the straight-line
//! distance and an obstacle-aware grid distance to the goal.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::f64::consts::{PI, SQRT_2, TAU};

use crate::error::SearchError;
use crate::grid::{Cell, OccupancyGrid};
use crate::path::{angle_diff, CoarsePath, Direction, Pose};

#[derive(Debug, Clone, PartialEq)]
pub struct SearchParams {
    /// Maximum path curvature (1/m).
    pub kappa_max: f64,
    /// Offset of the front disc center along the heading (m).
    pub disc_offset: f64,
    pub heading_bins: usize,
    /// Primitive arc length as a multiple of the grid resolution.
    pub step_factor: f64,
    /// Cost multiplier for reverse motion.
    pub reverse_cost: f64,
    /// Fixed cost (m-equivalent) charged at every gear change.
    pub switch_penalty: f64,
    pub goal_position_tolerance: f64,
    pub goal_heading_tolerance: f64,
    pub max_expansions: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            kappa_max: 0.4,
            disc_offset: 1.2,
            heading_bins: 72,
            step_factor: 1.5,
            reverse_cost: 2.0,
            switch_penalty: 2.0,
            goal_position_tolerance: 0.3,
            goal_heading_tolerance: 10f64.to_radians(),
            max_expansions: 2_000_000,
        }
    }
}

impl SearchParams {
    /// Curvatures of the motion primitives, for each gear.
    pub fn curvatures(&self) -> [f64; 5] {
        let k = self.kappa_max;
        [-k, -0.5 * k, 0.0, 0.5 * k, k]
    }

    pub fn step_length(&self, grid: &OccupancyGrid) -> f64 {
        self.step_factor * grid.resolution()
    }

    /// Largest heading change a single primitive can produce.
    pub fn max_heading_change(&self, grid: &OccupancyGrid) -> f64 {
        self.kappa_max * self.step_length(grid)
    }
}

/// Pose reached by driving `distance` meters (negative in reverse) along an arc of curvature `kappa`.
pub fn drive_arc(pose: &Pose, kappa: f64, distance: f64, direction: Direction) -> Pose {
    let (x, y, th) = (pose.x, pose.y, pose.theta);
    let th2 = th + kappa * distance;
    let (nx, ny) = if kappa.abs() < 1e-12 {
        (x + distance * th.cos(), y + distance * th.sin())
    } else {
        (
            x + (th2.sin() - th.sin()) / kappa,
            y - (th2.cos() - th.cos()) / kappa,
        )
    };
    Pose::new(nx, ny, th2, direction)
}

/// Both disc centers of the two-disc footprint lie in free cells.
pub fn pose_is_free(grid: &OccupancyGrid, pose: &Pose, disc_offset: f64) -> bool {
    !grid.is_occupied(pose.position()) && !grid.is_occupied(pose.front(disc_offset))
}

/// Collision check along a primitive, sampled at no more than half a cell. The cell box
/// spanned by the two end positions must also be free, so consecutive path poses can
/// always share an axis-aligned corridor box.
fn arc_is_free(
    grid: &OccupancyGrid,
    from: &Pose,
    kappa: f64,
    distance: f64,
    direction: Direction,
    disc_offset: f64,
) -> bool {
    let end = drive_arc(from, kappa, distance, direction);
    if !grid.span_is_free(from.position(), end.position()) {
        return false;
    }
    let samples = (distance.abs() / (0.5 * grid.resolution())).ceil().max(1.0) as usize;
    (1..=samples).all(|s| {
        let d = distance * s as f64 / samples as f64;
        pose_is_free(grid, &drive_arc(from, kappa, d, direction), disc_offset)
    })
}

/// Grid distance (8-connected, cell centers) from `goal` to every free cell.
pub fn grid_distance_field(grid: &OccupancyGrid, goal: Cell) -> Vec<f64> {
    let (w, h) = (grid.width(), grid.height());
    let mut dist = vec![f64::INFINITY; w * h];
    if grid.cell_occupied(goal) {
        return dist;
    }
    let res = grid.resolution();
    let mut heap = BinaryHeap::new();
    dist[goal.j * w + goal.i] = 0.0;
    heap.push(HeapEntry {
        f: 0.0,
        order: 0,
        node: goal.j * w + goal.i,
    });
    let mut order = 1;
    while let Some(HeapEntry { f, node, .. }) = heap.pop() {
        if f > dist[node] {
            continue;
        }
        let (i, j) = ((node % w) as isize, (node / w) as isize);
        for (di, dj) in [
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
        ] {
            let (ni, nj) = (i + di, j + dj);
            if ni < 0 || nj < 0 || ni as usize >= w || nj as usize >= h {
                continue;
            }
            let cell = Cell::new(ni as usize, nj as usize);
            if grid.cell_occupied(cell) {
                continue;
            }
            let step = if di != 0 && dj != 0 { res * SQRT_2 } else { res };
            let idx = cell.j * w + cell.i;
            if f + step < dist[idx] {
                dist[idx] = f + step;
                heap.push(HeapEntry {
                    f: f + step,
                    order,
                    node: idx,
                });
                order += 1;
            }
        }
    }
    dist
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    f: f64,
    order: usize,
    node: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    // Min-heap on f, FIFO among ties.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.order.cmp(&self.order))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct LatticeKey {
    i: usize,
    j: usize,
    heading: usize,
    reverse: bool,
}

struct Node {
    pose: Pose,
    g: f64,
    parent: Option<usize>,
}

/// Cost of a search result as the search accounts it: primitive arc length (reverse
/// weighted) plus gear-change penalties. `step` is the primitive length used.
pub fn path_cost(path: &CoarsePath, params: &SearchParams, step: f64) -> f64 {
    let poses = path.poses();
    let mut cost = 0.0;
    for k in 1..poses.len() {
        let mult = match poses[k].direction {
            Direction::Forward => 1.0,
            Direction::Reverse => params.reverse_cost,
        };
        cost += mult * step;
        if k >= 2 && poses[k].direction != poses[k - 1].direction {
            cost += params.switch_penalty;
        }
    }
    cost
}

fn goal_reached(pose: &Pose, goal: &Pose, params: &SearchParams) -> bool {
    pose.distance(goal) <= params.goal_position_tolerance
        && angle_diff(pose.theta, goal.theta).abs() <= params.goal_heading_tolerance
}

pub fn plan_path(
    grid: &OccupancyGrid,
    start: Pose,
    goal: Pose,
    params: &SearchParams,
) -> Result<CoarsePath, SearchError> {
    if !pose_is_free(grid, &start, params.disc_offset) {
        return Err(SearchError::StartOccupied);
    }
    if !pose_is_free(grid, &goal, params.disc_offset) {
        return Err(SearchError::GoalOccupied);
    }
    if goal_reached(&start, &goal, params) {
        return Ok(CoarsePath::new(vec![start]));
    }

    let goal_cell = grid
        .world_to_cell(goal.position())
        .ok_or(SearchError::GoalOccupied)?;
    let field = grid_distance_field(grid, goal_cell);
    let res = grid.resolution();
    // Octile distances overshoot straight lines by at most this factor.
    let octile_excess = (4.0 - 2.0 * SQRT_2).sqrt();
    let heuristic = |pose: &Pose| -> f64 {
        let euclid = pose.distance(&goal);
        let cell = match grid.world_to_cell(pose.position()) {
            Some(c) => c,
            None => return f64::INFINITY,
        };
        let d = field[cell.j * grid.width() + cell.i];
        if d.is_infinite() {
            return f64::INFINITY;
        }
        euclid.max(d / octile_excess - res * SQRT_2)
    };

    let bins = params.heading_bins.max(1);
    let key_of = |pose: &Pose| -> Option<LatticeKey> {
        let cell = grid.world_to_cell(pose.position())?;
        let h = (((pose.theta + PI) / TAU) * bins as f64).floor() as isize;
        Some(LatticeKey {
            i: cell.i,
            j: cell.j,
            heading: h.rem_euclid(bins as isize) as usize,
            reverse: pose.direction == Direction::Reverse,
        })
    };

    let h0 = heuristic(&start);
    if h0.is_infinite() {
        return Err(SearchError::NoPath { expansions: 0 });
    }

    let step = params.step_length(grid);
    let curvatures = params.curvatures();
    let mut nodes = vec![Node {
        pose: start,
        g: 0.0,
        parent: None,
    }];
    let mut best_g: HashMap<LatticeKey, f64> = HashMap::new();
    let mut closed: HashSet<LatticeKey> = HashSet::new();
    let mut open = BinaryHeap::new();
    let mut order = 0usize;
    open.push(HeapEntry {
        f: h0,
        order,
        node: 0,
    });
    let mut expansions = 0usize;

    while let Some(HeapEntry { node, .. }) = open.pop() {
        let (pose, g) = (nodes[node].pose, nodes[node].g);
        if goal_reached(&pose, &goal, params) {
            return Ok(reconstruct(&nodes, node));
        }
        // The start pose has no lattice key collision concerns; everything else is de-duplicated.
        if node != 0 {
            let key = key_of(&pose).expect("open nodes lie on the grid");
            if !closed.insert(key) {
                continue;
            }
        }
        expansions += 1;
        if expansions > params.max_expansions {
            return Err(SearchError::ExpansionLimit {
                limit: params.max_expansions,
            });
        }
        let arrived_reverse = nodes[node].parent.map(|_| pose.direction);
        for direction in [Direction::Forward, Direction::Reverse] {
            let distance = direction.sign() * step;
            let mut edge = step;
            if direction == Direction::Reverse {
                edge *= params.reverse_cost;
            }
            if arrived_reverse.is_some_and(|d| d != direction) {
                edge += params.switch_penalty;
            }
            for &kappa in &curvatures {
                if !arc_is_free(grid, &pose, kappa, distance, direction, params.disc_offset) {
                    continue;
                }
                let next = drive_arc(&pose, kappa, distance, direction);
                let Some(key) = key_of(&next) else { continue };
                if closed.contains(&key) {
                    continue;
                }
                let g_next = g + edge;
                if best_g.get(&key).is_some_and(|&b| b <= g_next) {
                    continue;
                }
                let h = heuristic(&next);
                if h.is_infinite() {
                    continue;
                }
                best_g.insert(key, g_next);
                nodes.push(Node {
                    pose: next,
                    g: g_next,
                    parent: Some(node),
                });
                order += 1;
                open.push(HeapEntry {
                    f: g_next + h,
                    order,
                    node: nodes.len() - 1,
                });
            }
        }
    }
    Err(SearchError::NoPath { expansions })
}

fn reconstruct(nodes: &[Node], mut idx: usize) -> CoarsePath {
    let mut poses = vec![nodes[idx].pose];
    while let Some(parent) = nodes[idx].parent {
        poses.push(nodes[parent].pose);
        idx = parent;
    }
    poses.reverse();
    if poses.len() > 1 {
        poses[0].direction = poses[1].direction;
    }
    CoarsePath::new(poses)
}
