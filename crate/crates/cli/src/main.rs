use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod bench;

use nhplan::error::{ConfigError, GridError, PlanError, SearchError};
use nhplan::export::{corridor_json, dense_csv, knot_csv, render_svg, PlotInput};
use nhplan::grid::OccupancyGrid;
use nhplan::optimizer::{check_trajectory, metrics, sample_trajectory, PlannerConfig, State, Tolerances};
use nhplan::pipeline::{plan, replan, PlanOutcome};
use nhplan::scenario::{parse_state, ScenarioSpec};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NO_PATH: u8 = 3;
pub const EXIT_CORRIDOR: u8 = 4;
pub const EXIT_NOT_CONVERGED: u8 = 5;
pub const EXIT_IO: u8 = 6;

#[derive(Parser)]
#[command(name = "nhplan", version, about = "Trajectory planning for car-like robots on occupancy grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan one trajectory and write it out.
    Plan {
        #[arg(long)]
        map: PathBuf,
        /// Start state `x,y,theta,v`.
        #[arg(long, value_parser = parse_state, allow_hyphen_values = true)]
        start: State,
        /// Goal state `x,y,theta,v`.
        #[arg(long, value_parser = parse_state, allow_hyphen_values = true)]
        goal: State,
        /// Config file; defaults apply to keys it omits.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        /// Also write `plan.svg`.
        #[arg(long)]
        svg: bool,
    },
    /// Plan a scenario, move the start along the result and re-solve warm and cold.
    Replan {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        offset_sec: f64,
    },
    /// Run scenarios repeatedly and tabulate timings and trajectory metrics.
    Bench {
        #[arg(long, num_args = 1.., required = true)]
        scenarios: Vec<PathBuf>,
        /// Repetitions per scenario; defaults to each scenario's `reps`.
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Start offset of the warm-started replan (s).
        #[arg(long, default_value_t = 0.5)]
        offset_sec: f64,
        /// Scenarios run in parallel; repetitions of one scenario always run in sequence.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

/// A failed command: message and exit status.
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

pub fn plan_failure(e: PlanError) -> Failure {
    let code = match &e {
        PlanError::Search(SearchError::NoPath { .. } | SearchError::ExpansionLimit { .. }) => EXIT_NO_PATH,
        PlanError::Search(SearchError::StartOccupied | SearchError::GoalOccupied) => EXIT_NO_PATH,
        PlanError::Corridor(_) => EXIT_CORRIDOR,
        PlanError::Optimizer(_) => EXIT_NOT_CONVERGED,
        PlanError::Grid(g) => return grid_failure(g),
        PlanError::Config(c) => return config_failure(c),
        PlanError::Usage(_) => EXIT_USAGE,
    };
    Failure::new(code, e.to_string())
}

fn grid_failure(e: &GridError) -> Failure {
    let code = if matches!(e, GridError::Io { .. }) { EXIT_IO } else { EXIT_USAGE };
    Failure::new(code, format!("map: {e}"))
}

fn config_failure(e: &ConfigError) -> Failure {
    let code = if matches!(e, ConfigError::Io { .. }) { EXIT_IO } else { EXIT_USAGE };
    Failure::new(code, format!("config: {e}"))
}

pub fn load_scenario(path: &Path) -> Result<(ScenarioSpec, OccupancyGrid), Failure> {
    let spec = ScenarioSpec::load(path).map_err(|e| {
        let mut f = config_failure(&e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })?;
    let grid = spec.load_map().map_err(|e| grid_failure(&e))?;
    Ok((spec, grid))
}

/// Fails unless the solve converged and the trajectory passes every invariant.
pub fn verify(outcome: &PlanOutcome) -> Result<(), Failure> {
    let r = &outcome.report;
    let mut problems = check_trajectory(&outcome.problem, &r.trajectory, &Tolerances::default());
    if !r.converged {
        problems.insert(0, format!("solver stopped with {:?} after {} rounds", r.termination, r.rounds));
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_NOT_CONVERGED, format!("trajectory rejected: {}", problems.join("; "))))
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display())))
}

fn summarize(outcome: &PlanOutcome, config: &PlannerConfig) {
    let r = &outcome.report;
    let t = &outcome.times;
    let m = metrics(&sample_trajectory(&r.trajectory, config.sample_dt));
    println!(
        "states {}  polygons {}  duration {:.3} s",
        r.trajectory.len(),
        outcome.problem.corridor.polygons().len(),
        r.trajectory.duration()
    );
    println!(
        "solver {:?}  iterations {}  evaluations {}  rounds {}  converged {}",
        r.termination, r.iterations, r.evaluations, r.rounds, r.converged
    );
    println!(
        "residuals: equality {:.2e}  safety {:.2e}  curvature {:.2e}  gear {:.2e}",
        r.residuals.equality, r.residuals.safety, r.residuals.curvature, r.residuals.gear
    );
    println!(
        "time ms: inflate {:.1}  search {:.1}  corridor {:.1}  optimize {:.1}  total {:.1}",
        t.inflate_ms,
        t.search_ms,
        t.corridor_ms,
        t.optimize_ms,
        t.total_ms()
    );
    println!(
        "|v| mean {:.3} max {:.3}  |a| mean {:.3} max {:.3}  |jerk| mean {:.3} max {:.3}",
        m.mean_v, m.max_v, m.mean_a, m.max_a, m.mean_jerk, m.max_jerk
    );
}

fn cmd_plan(
    map: &Path,
    start: State,
    goal: State,
    config: Option<&Path>,
    out_dir: &Path,
    svg: bool,
) -> Result<(), Failure> {
    let config = match config {
        Some(p) => PlannerConfig::load(p).map_err(|e| config_failure(&e))?,
        None => PlannerConfig::default(),
    };
    let grid = OccupancyGrid::load(map).map_err(|e| grid_failure(&e))?;
    let outcome = plan(&grid, start, goal, &config).map_err(plan_failure)?;
    summarize(&outcome, &config);
    verify(&outcome)?;

    std::fs::create_dir_all(out_dir)
        .map_err(|e| Failure::new(EXIT_IO, format!("cannot create {}: {e}", out_dir.display())))?;
    let traj = &outcome.report.trajectory;
    let samples = sample_trajectory(traj, config.sample_dt);
    write(&out_dir.join("knots.csv"), &knot_csv(traj))?;
    write(&out_dir.join("dense.csv"), &dense_csv(&samples))?;
    write(&out_dir.join("corridor.json"), &corridor_json(&outcome.problem.corridor))?;
    if svg {
        let plot = render_svg(&PlotInput {
            grid: &grid,
            corridor: &outcome.problem.corridor,
            initial: &outcome.problem.path,
            trajectory: traj,
            samples: &samples,
            config: &config,
        });
        write(&out_dir.join("plan.svg"), &plot)?;
    }
    println!("wrote {}", out_dir.display());
    Ok(())
}

fn cmd_replan(scenario: &Path, offset: f64) -> Result<(), Failure> {
    let (spec, grid) = load_scenario(scenario)?;
    let outcome = plan(&grid, spec.start, spec.goal, &spec.config).map_err(plan_failure)?;
    verify(&outcome)?;
    let duration = outcome.report.trajectory.duration();
    if !(offset >= 0.0 && offset < duration) {
        return Err(Failure::new(
            EXIT_USAGE,
            format!("--offset-sec {offset} must lie in [0, {duration:.3}) for this trajectory"),
        ));
    }
    let rp = replan(&outcome, offset).map_err(plan_failure)?;
    let s = rp.start;
    println!("{}: replan {offset} s in, start ({:.3}, {:.3}, {:.3}, {:.3})", spec.name, s.x, s.y, s.theta, s.v);
    for (name, r) in [("warm", &rp.warm), ("cold", &rp.cold)] {
        println!(
            "{name}: iterations {}  rounds {}  {:.1} ms  {:?}  converged {}",
            r.iterations, r.rounds, r.wall_ms, r.termination, r.converged
        );
    }
    println!("iteration ratio {:.3}  time ratio {:.3}", rp.iteration_ratio(), rp.time_ratio());
    let problems = check_trajectory(&rp.problem, &rp.warm.trajectory, &Tolerances::default());
    if !rp.warm.converged || !problems.is_empty() {
        return Err(Failure::new(
            EXIT_NOT_CONVERGED,
            format!("warm re-solve rejected: {}", problems.join("; ")),
        ));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Plan {
            map,
            start,
            goal,
            config,
            out_dir,
            svg,
        } => cmd_plan(map, *start, *goal, config.as_deref(), out_dir, *svg),
        Command::Replan { scenario, offset_sec } => cmd_replan(scenario, *offset_sec),
        Command::Bench {
            scenarios,
            reps,
            out,
            offset_sec,
            jobs,
        } => bench::cmd_bench(scenarios, *reps, out, *offset_sec, *jobs),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
