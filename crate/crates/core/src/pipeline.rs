//! Search, corridor construction and optimization chained into one planning query.

use std::time::Instant;

use crate::corridor::{build_corridor, Corridor};
use crate::error::{CorridorError, PlanError};
use crate::grid::OccupancyGrid;
use crate::optimizer::{initial_guess, solve, Init, PlannerConfig, ProblemSpec, SolveReport, State};
use crate::path::{CoarsePath, Direction, Pose};
use crate::search::plan_path;

/// Wall-clock time of each pipeline phase (ms).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimes {
    pub inflate_ms: f64,
    pub search_ms: f64,
    pub corridor_ms: f64,
    pub optimize_ms: f64,
}

impl PhaseTimes {
    pub fn total_ms(&self) -> f64 {
        self.inflate_ms + self.search_ms + self.corridor_ms + self.optimize_ms
    }
}

/// Everything produced by one planning query.
#[derive(Debug, Clone)]
pub struct PlanOutcome {
    /// Grid inflated by the disc radius.
    pub inflated: OccupancyGrid,
    /// Search output, ending exactly at the goal.
    pub coarse: CoarsePath,
    pub problem: ProblemSpec,
    pub report: SolveReport,
    pub times: PhaseTimes,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Picks the optimizer states among the poses of a search path.
///
/// Poses are taken at roughly `spacing` apart; gear switches and the endpoints are always
/// taken. A pose is also taken whenever skipping it would leave two consecutive states
/// whose spanned cell box is not free on `inflated`, so every pair of neighbors fits in
/// one axis-aligned corridor box.
pub fn select_states(inflated: &OccupancyGrid, path: &CoarsePath, spacing: f64) -> CoarsePath {
    let poses = path.poses();
    if poses.len() < 2 {
        return path.clone();
    }
    let last = poses.len() - 1;
    let mut out = vec![poses[0]];
    let mut run = 0.0;
    for k in 1..last {
        run += poses[k - 1].distance(&poses[k]);
        let next = run + poses[k].distance(&poses[k + 1]);
        let anchor = *out.last().unwrap();
        let take = path.is_gear_switch(k)
            || next - spacing > spacing - run
            || !inflated.span_is_free(anchor.position(), poses[k + 1].position());
        if take {
            out.push(poses[k]);
            run = 0.0;
        }
    }
    out.push(poses[last]);
    CoarsePath::new(out)
}

/// States and corridor along a search path.
pub fn corridor_along(
    inflated: &OccupancyGrid,
    path: &CoarsePath,
    config: &PlannerConfig,
) -> Result<(CoarsePath, Corridor), CorridorError> {
    let states = select_states(inflated, path, config.spacing);
    let corridor = build_corridor(inflated, &states, &config.corridor_params())?;
    Ok((states, corridor))
}

/// Search output made usable as a state sequence: it ends exactly at the goal and has
/// at least two poses.
fn close_path(path: CoarsePath, goal: &State) -> CoarsePath {
    let mut poses = path.poses().to_vec();
    let last = *poses.last().expect("search paths are non-empty");
    let target = Pose::new(goal.x, goal.y, goal.theta, last.direction);
    if poses.len() == 1 || last.distance(&target) > 1e-9 || last.theta != target.theta {
        poses.push(target);
    }
    CoarsePath::new(poses)
}

/// Plans from `start` to `goal` on the raw (uninflated) grid.
pub fn plan(
    grid: &OccupancyGrid,
    start: State,
    goal: State,
    config: &PlannerConfig,
) -> Result<PlanOutcome, PlanError> {
    config.validate()?;
    let mut times = PhaseTimes::default();

    let t = Instant::now();
    let inflated = grid.inflate(config.radius)?;
    times.inflate_ms = ms(t);

    let t = Instant::now();
    let found = plan_path(
        &inflated,
        start.pose(Direction::Forward),
        goal.pose(Direction::Forward),
        &config.search_params(),
    )?;
    let coarse = close_path(found, &goal);
    times.search_ms = ms(t);

    let t = Instant::now();
    let (path, corridor) = corridor_along(&inflated, &coarse, config)?;
    times.corridor_ms = ms(t);

    let t = Instant::now();
    let guess = initial_guess(&path, config)?;
    let problem = ProblemSpec {
        start,
        goal,
        corridor,
        config: config.clone(),
        path,
    };
    let report = solve(&problem, Init::Cold(guess))?;
    times.optimize_ms = ms(t);

    Ok(PlanOutcome {
        inflated,
        coarse,
        problem,
        report,
        times,
    })
}

/// Result of re-solving after moving the start along a previous trajectory.
#[derive(Debug, Clone)]
pub struct ReplanOutcome {
    /// Start state `offset` seconds into the previous trajectory.
    pub start: State,
    pub problem: ProblemSpec,
    /// Solve initialized from the remaining previous trajectory.
    pub warm: SolveReport,
    /// Solve of the same problem from the path-based initial guess.
    pub cold: SolveReport,
    pub corridor_ms: f64,
}

impl ReplanOutcome {
    pub fn iteration_ratio(&self) -> f64 {
        self.warm.iterations as f64 / self.cold.iterations.max(1) as f64
    }

    pub fn time_ratio(&self) -> f64 {
        self.warm.wall_ms / self.cold.wall_ms.max(1e-9)
    }
}

/// Replans from the state `offset` seconds into `previous`, solving both warm and cold.
///
/// A zero offset re-solves the unchanged problem. Otherwise the states passed before
/// `offset` are dropped along with their polygons and the new start takes over the
/// assignment of the first remaining slot.
pub fn replan(previous: &PlanOutcome, offset: f64) -> Result<ReplanOutcome, PlanError> {
    let prev = &previous.problem;
    let config = &prev.config;
    let traj = &previous.report.trajectory;
    let remaining = traj.advance(offset, config.t_min)?;
    let start = remaining.first().state();

    let t = Instant::now();
    let problem = if offset == 0.0 {
        prev.clone()
    } else {
        let path = remaining.to_path();
        let corridor = prev.corridor.tail(prev.states() - path.len());
        ProblemSpec {
            start,
            goal: prev.goal,
            corridor,
            config: config.clone(),
            path,
        }
    };
    let corridor_ms = ms(t);

    let warm = solve(
        &problem,
        Init::Warm {
            trajectory: remaining,
            penalty_scale: previous.report.penalty_scale,
        },
    )?;
    let cold = solve(&problem, Init::Cold(initial_guess(&problem.path, config)?))?;
    Ok(ReplanOutcome {
        start,
        problem,
        warm,
        cold,
        corridor_ms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free_grid(w: usize, h: usize, res: f64) -> OccupancyGrid {
        OccupancyGrid::new(w, h, res, [0.0, 0.0]).unwrap()
    }

    #[test]
    fn close_path_appends_exact_goal() {
        let goal = State::new(2.1, 0.0, 0.05, 0.0);
        let path = CoarsePath::new(vec![Pose::forward(0.0, 0.0, 0.0), Pose::forward(2.0, 0.0, 0.0)]);
        let closed = close_path(path, &goal);
        assert_eq!(closed.len(), 3);
        let last = closed.last().unwrap();
        assert_eq!((last.x, last.y, last.theta), (2.1, 0.0, 0.05));
    }

    #[test]
    fn close_path_duplicates_single_pose() {
        let s = State::new(1.0, 1.0, 0.0, 0.0);
        let closed = close_path(CoarsePath::new(vec![s.pose(Direction::Forward)]), &s);
        assert_eq!(closed.len(), 2);
    }

    #[test]
    fn state_selection_spacing_and_connectivity() {
        let grid = free_grid(60, 20, 0.2);
        let raw = CoarsePath::new((0..=30).map(|k| Pose::forward(0.5 + 0.3 * k as f64, 2.0, 0.0)).collect());
        let picked = select_states(&grid, &raw, 1.0);
        // 9 m in steps of 0.9 m.
        assert_eq!(picked.len(), 11);
        assert_eq!(picked.last(), raw.last());

        // An occupied cell diagonal to the path forces extra states around it.
        let mut blocked = grid.clone();
        blocked.set_occupied(crate::grid::Cell::new(12, 11), true);
        let diag = CoarsePath::new((0..=20).map(|k| Pose::forward(1.0 + 0.15 * k as f64, 1.0 + 0.15 * k as f64, 0.785)).collect());
        for w in select_states(&blocked, &diag, 1.0).poses().windows(2) {
            let free = blocked.span_is_free(w[0].position(), w[1].position());
            let raw_neighbors = diag.poses().windows(2).any(|r| r[0] == w[0] && r[1] == w[1]);
            assert!(free || raw_neighbors);
        }
    }

    #[test]
    fn straight_plan_on_free_map() {
        let grid = free_grid(100, 50, 0.2);
        let out = plan(
            &grid,
            State::new(3.0, 5.0, 0.0, 0.0),
            State::new(15.0, 5.0, 0.0, 0.0),
            &PlannerConfig::default(),
        )
        .unwrap();
        let r = &out.report;
        assert!(r.converged, "{:?} {:?} {} {} {:?}", r.residuals, r.termination, r.iterations, r.rounds, r.penalty_scale);
        assert!(r.box_feasible);
        assert!(r.residuals.equality < 1e-3);
        assert!(out.times.total_ms() > 0.0);
    }
}
