use super::model::Trajectory;
use super::solve::ProblemSpec;

/// Largest residuals a trajectory may carry and still be emitted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub equality: f64,
    /// Meters, at either disc center.
    pub safety: f64,
    /// Excess of `|ω|/|v|` over `κ_max` where `|v|` exceeds the curvature threshold.
    pub curvature: f64,
    /// Bound on `−v_i v_{i+1}`.
    pub gear: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            equality: 1e-3,
            safety: 1e-3,
            curvature: 1e-3,
            gear: 1e-4,
        }
    }
}

/// Checks bounds and residuals of `traj` against `problem`; returns one message per
/// violated invariant.
pub fn check_trajectory(problem: &ProblemSpec, traj: &Trajectory, tol: &Tolerances) -> Vec<String> {
    let mut out = Vec::new();
    if traj.len() != problem.states() {
        out.push(format!("trajectory has {} states, problem has {}", traj.len(), problem.states()));
        return out;
    }
    if !problem.box_feasible(traj) {
        out.push("speed, acceleration or interval outside its bounds".to_string());
    }
    let r = problem.residuals(traj);
    for (name, value, limit) in [
        ("equality residual", r.equality, tol.equality),
        ("safety violation", r.safety, tol.safety),
        ("curvature excess", r.curvature, tol.curvature),
        ("gear-shift product", r.gear, tol.gear),
    ] {
        if !(value <= limit) {
            out.push(format!("{name} {value:.3e} exceeds {limit:.0e}"));
        }
    }
    out
}
