use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nhplan::optimizer::{metrics, sample_trajectory, Metrics};
use nhplan::pipeline::{plan, replan, PhaseTimes};

use crate::{load_scenario, plan_failure, verify, Failure, EXIT_IO, EXIT_USAGE};

/// Measurements of one repetition.
struct Run {
    times: PhaseTimes,
    iterations: usize,
    converged: bool,
    metrics: Metrics,
    warm_ms: f64,
    warm_iterations: usize,
    cold_replan_iterations: usize,
}

/// Raw runs of one scenario; every statistic is computed from these.
struct ScenarioRuns {
    name: String,
    runs: Vec<Run>,
    failures: Vec<String>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

fn run_scenario(path: &Path, reps: Option<usize>, offset: f64) -> ScenarioRuns {
    let name = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let mut out = ScenarioRuns {
        name,
        runs: Vec::new(),
        failures: Vec::new(),
    };
    let (spec, grid) = match load_scenario(path) {
        Ok(loaded) => loaded,
        Err(f) => {
            out.failures.push(f.message);
            return out;
        }
    };
    out.name = spec.name.clone();
    for _ in 0..reps.unwrap_or(spec.reps) {
        let attempt = (|| -> Result<Run, Failure> {
            let outcome = plan(&grid, spec.start, spec.goal, &spec.config).map_err(plan_failure)?;
            verify(&outcome)?;
            let traj = &outcome.report.trajectory;
            let offset = offset.min(0.5 * traj.duration());
            let rp = replan(&outcome, offset).map_err(plan_failure)?;
            Ok(Run {
                times: outcome.times,
                iterations: outcome.report.iterations,
                converged: outcome.report.converged,
                metrics: metrics(&sample_trajectory(traj, spec.config.sample_dt)),
                warm_ms: rp.warm.wall_ms,
                warm_iterations: rp.warm.iterations,
                cold_replan_iterations: rp.cold.iterations,
            })
        })();
        match attempt {
            Ok(run) => out.runs.push(run),
            Err(f) => out.failures.push(f.message),
        }
    }
    out
}

const COLUMNS: &[&str] = &[
    "scenario",
    "runs",
    "failures",
    "converged",
    "inflate_ms_mean",
    "inflate_ms_std",
    "search_ms_mean",
    "search_ms_std",
    "corridor_ms_mean",
    "corridor_ms_std",
    "optimize_ms_mean",
    "optimize_ms_std",
    "total_ms_mean",
    "total_ms_std",
    "iterations_mean",
    "warm_optimize_ms_mean",
    "warm_optimize_ms_std",
    "warm_iterations_mean",
    "cold_replan_iterations_mean",
    "mean_v",
    "max_v",
    "mean_a",
    "max_a",
    "mean_jerk",
    "max_jerk",
    "error",
];

fn quote(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

/// One CSV row: timing statistics, then metric means over the runs.
fn row(s: &ScenarioRuns) -> Vec<String> {
    let col = |f: &dyn Fn(&Run) -> f64| s.runs.iter().map(f).collect::<Vec<f64>>();
    let mut cells = vec![
        quote(&s.name),
        (s.runs.len() + s.failures.len()).to_string(),
        s.failures.len().to_string(),
        s.runs.iter().filter(|r| r.converged).count().to_string(),
    ];
    let timing: [&dyn Fn(&Run) -> f64; 5] = [
        &|r| r.times.inflate_ms,
        &|r| r.times.search_ms,
        &|r| r.times.corridor_ms,
        &|r| r.times.optimize_ms,
        &|r| r.times.total_ms(),
    ];
    for f in timing {
        let (m, sd) = mean_std(&col(f));
        cells.push(format!("{m:.3}"));
        cells.push(format!("{sd:.3}"));
    }
    cells.push(format!("{:.1}", mean_std(&col(&|r| r.iterations as f64)).0));
    let (m, sd) = mean_std(&col(&|r| r.warm_ms));
    cells.push(format!("{m:.3}"));
    cells.push(format!("{sd:.3}"));
    cells.push(format!("{:.1}", mean_std(&col(&|r| r.warm_iterations as f64)).0));
    cells.push(format!("{:.1}", mean_std(&col(&|r| r.cold_replan_iterations as f64)).0));
    let metric: [&dyn Fn(&Run) -> f64; 6] = [
        &|r| r.metrics.mean_v,
        &|r| r.metrics.max_v,
        &|r| r.metrics.mean_a,
        &|r| r.metrics.max_a,
        &|r| r.metrics.mean_jerk,
        &|r| r.metrics.max_jerk,
    ];
    for f in metric {
        cells.push(format!("{:.4}", mean_std(&col(f)).0));
    }
    cells.push(quote(s.failures.first().map_or("", String::as_str)));
    cells
}

pub fn cmd_bench(
    scenarios: &[PathBuf],
    reps: Option<usize>,
    out: &Path,
    offset: f64,
    jobs: usize,
) -> Result<(), Failure> {
    if scenarios.is_empty() {
        return Err(Failure::new(EXIT_USAGE, "no scenarios given"));
    }
    if reps == Some(0) || jobs == 0 {
        return Err(Failure::new(EXIT_USAGE, "--reps and --jobs must be positive"));
    }
    if !(offset > 0.0) {
        return Err(Failure::new(EXIT_USAGE, "--offset-sec must be positive"));
    }
    let mut results = Vec::with_capacity(scenarios.len());
    for chunk in scenarios.chunks(jobs) {
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|p| scope.spawn(move || run_scenario(p, reps, offset)))
                .collect();
            results.extend(handles.into_iter().map(|h| h.join().expect("benchmark thread panicked")));
        });
    }

    let mut csv = COLUMNS.join(",");
    csv.push('\n');
    println!(
        "{:<12} {:>5} {:>5} {:>10} {:>10} {:>12} {:>10} {:>10} {:>9}",
        "scenario", "runs", "fail", "search ms", "corr ms", "optimize ms", "warm ms", "warm/cold", "jerk"
    );
    for s in &results {
        let cells = row(s);
        writeln!(csv, "{}", cells.join(",")).unwrap();
        let cold = s.runs.iter().map(|r| r.cold_replan_iterations).sum::<usize>().max(1);
        let warm = s.runs.iter().map(|r| r.warm_iterations).sum::<usize>();
        println!(
            "{:<12} {:>5} {:>5} {:>10} {:>10} {:>12} {:>10} {:>10.3} {:>9}",
            s.name,
            cells[1],
            cells[2],
            format!("{}±{}", cells[6], cells[7]),
            cells[8],
            format!("{}±{}", cells[10], cells[11]),
            cells[15],
            warm as f64 / cold as f64,
            cells[23]
        );
        for f in &s.failures {
            println!("  {}: {f}", s.name);
        }
    }
    std::fs::write(out, csv).map_err(|e| Failure::new(EXIT_IO, format!("cannot write {}: {e}", out.display())))?;
    println!("wrote {}", out.display());
    Ok(())
}
