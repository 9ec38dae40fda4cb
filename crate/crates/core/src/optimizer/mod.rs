//! Discrete-state trajectory optimization.
//!
//! A trajectory is `n + 1` states `[x, y, θ, v]` with controls `[a, ω]` and the `n`
//! intervals between them. Dynamics, endpoints and corridor containment enter as
//! penalties; speed, acceleration and interval limits are solver bounds.

mod check;
mod config;
mod cost;
mod guess;
mod model;
mod penalty;
mod sample;
mod solve;

pub use check::{check_trajectory, Tolerances};
pub use config::{key_value_lines, PlannerConfig, CONFIG_KEYS};
pub use cost::{
    equality_penalty, full_objective_and_gradient, inequality_penalty, objective_smoothness_time,
    residuals, CostBreakdown, CostModel, Residuals, Weights, CURVATURE_MIN_SPEED,
};
pub use guess::initial_guess;
pub use model::{angle_residual, transition, State, Trajectory, TrajectoryPoint, STATE_BLOCK};
pub use penalty::{penalty_l, penalty_l_grad};
pub use sample::{metrics, naive_time_parameterization, sample_trajectory, DenseSample, Metrics};
pub use solve::{solve, Init, PenaltyScale, ProblemSpec, SolveReport};
