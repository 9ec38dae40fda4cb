use std::time::Instant;

use crate::corridor::Corridor;
use crate::error::OptimizerError;
use crate::lbfgsb::{minimize, BoxProblem, Termination};
use crate::path::CoarsePath;

use super::config::PlannerConfig;
use super::cost::{residuals, CostModel, Residuals, Weights};
use super::model::{State, Trajectory};

/// One trajectory optimization query.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub start: State,
    pub goal: State,
    pub corridor: Corridor,
    pub config: PlannerConfig,
    /// Coarse path the corridor was built on; one pose per state.
    pub path: CoarsePath,
}

impl ProblemSpec {
    /// State count `n + 1`.
    pub fn states(&self) -> usize {
        self.corridor.state_count()
    }

    pub fn cost_model(&self, scale: PenaltyScale) -> CostModel<'_> {
        CostModel::new(
            self.start,
            self.goal,
            &self.corridor,
            Weights::from_config(&self.config, scale.equality, scale.inequality),
            self.config.kappa_max,
            self.config.disc_offset,
        )
    }

    /// Box bounds on the packed variables.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let c = &self.config;
        let ns = self.states();
        let inf = f64::INFINITY;
        let mut lo = Vec::with_capacity(Trajectory::packed_len(ns));
        let mut hi = Vec::with_capacity(lo.capacity());
        for _ in 0..ns {
            lo.extend_from_slice(&[-inf, -inf, -inf, c.v_min, c.a_min, -inf]);
            hi.extend_from_slice(&[inf, inf, inf, c.v_max, c.a_max, inf]);
        }
        lo.extend(std::iter::repeat(c.t_min).take(ns - 1));
        hi.extend(std::iter::repeat(c.t_max).take(ns - 1));
        (lo, hi)
    }

    pub fn residuals(&self, traj: &Trajectory) -> Residuals {
        residuals(
            traj,
            &self.start,
            &self.goal,
            &self.corridor,
            self.config.kappa_max,
            self.config.disc_offset,
        )
    }

    /// True when every speed, acceleration and interval lies inside its bounds.
    pub fn box_feasible(&self, traj: &Trajectory) -> bool {
        let c = &self.config;
        let n = traj.intervals();
        traj.points().iter().enumerate().all(|(k, p)| {
            (c.v_min..=c.v_max).contains(&p.v)
                && (c.a_min..=c.a_max).contains(&p.a)
                && (k == n || (c.t_min..=c.t_max).contains(&p.t))
        })
    }
}

/// Multipliers applied to `λ_eq` and `λ_ie` by penalty continuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyScale {
    pub equality: f64,
    pub inequality: f64,
}

impl Default for PenaltyScale {
    fn default() -> Self {
        Self {
            equality: 1.0,
            inequality: 1.0,
        }
    }
}

/// Starting point of a solve.
#[derive(Debug, Clone)]
pub enum Init {
    Cold(Trajectory),
    /// A previous solution; resampled when its state count differs, and solved starting
    /// from its penalty scale.
    Warm {
        trajectory: Trajectory,
        penalty_scale: PenaltyScale,
    },
}

impl Init {
    pub fn from_report(report: &SolveReport) -> Self {
        Init::Warm {
            trajectory: report.trajectory.clone(),
            penalty_scale: report.penalty_scale,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub trajectory: Trajectory,
    pub objective: f64,
    /// Recomputed from `trajectory`.
    pub residuals: Residuals,
    pub box_feasible: bool,
    /// Solver iterations summed over continuation rounds.
    pub iterations: usize,
    pub evaluations: usize,
    pub rounds: usize,
    pub penalty_scale: PenaltyScale,
    pub termination: Termination,
    pub wall_ms: f64,
    /// Solver converged and every residual met its target.
    pub converged: bool,
}

impl SolveReport {
    pub fn max_equality_residual(&self) -> f64 {
        self.residuals.equality
    }

    pub fn max_safety_violation(&self) -> f64 {
        self.residuals.safety
    }

    pub fn max_curvature_violation(&self) -> f64 {
        self.residuals.curvature
    }

    pub fn max_gear_violation(&self) -> f64 {
        self.residuals.gear
    }
}

/// Minimizes the penalized objective, raising penalty weights until residual targets are
/// met or the round limit is reached.
pub fn solve(problem: &ProblemSpec, init: Init) -> Result<SolveReport, OptimizerError> {
    let started = Instant::now();
    let ns = problem.states();
    if ns < 2 {
        return Err(OptimizerError::TooFewStates);
    }
    let (traj, mut scale) = match init {
        Init::Cold(t) => (t, PenaltyScale::default()),
        Init::Warm {
            trajectory,
            penalty_scale,
        } => (trajectory.resample(ns)?, penalty_scale),
    };
    if traj.len() != ns {
        return Err(OptimizerError::StateCount {
            expected: ns,
            found: traj.len(),
        });
    }
    let cfg = &problem.config;
    let (lower, upper) = problem.bounds();
    let options = cfg.minimize_options();
    let mut x = traj.pack();

    let mut iterations = 0;
    let mut evaluations = 0;
    let mut rounds = 0;
    loop {
        rounds += 1;
        let model = problem.cost_model(scale);
        let mut boxed = BoxProblem::new(lower.clone(), upper.clone(), |z: &[f64], g: &mut [f64]| {
            model.evaluate(z, g)
        })?;
        let result = minimize(&mut boxed, &x, &options)?;
        iterations += result.iterations;
        evaluations += result.evaluations;
        x = result.x;
        let traj = Trajectory::unpack(ns, &x)?;
        let res = problem.residuals(&traj);
        let eq_ok = res.equality <= cfg.eq_target;
        let ie_ok = res.safety <= cfg.safety_target
            && res.curvature <= cfg.curvature_target
            && res.gear <= cfg.gear_target;
        let solver_ok = result.termination.is_converged();
        if (eq_ok && ie_ok) || rounds >= cfg.max_penalty_rounds {
            return Ok(SolveReport {
                box_feasible: problem.box_feasible(&traj),
                objective: result.value,
                residuals: res,
                trajectory: traj,
                iterations,
                evaluations,
                rounds,
                penalty_scale: scale,
                termination: result.termination,
                wall_ms: started.elapsed().as_secs_f64() * 1e3,
                converged: solver_ok && eq_ok && ie_ok,
            });
        }
        if !eq_ok {
            scale.equality *= cfg.penalty_growth;
        }
        if !ie_ok {
            scale.inequality *= cfg.penalty_growth;
        }
    }
}
