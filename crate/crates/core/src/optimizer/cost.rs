use crate::corridor::{Corridor, HPolygon};
use crate::error::OptimizerError;

use super::config::PlannerConfig;
use super::model::{transition_unchecked, State, Trajectory, STATE_BLOCK};
use super::penalty::{penalty_l, penalty_l_grad};

const X: usize = 0;
const Y: usize = 1;
const TH: usize = 2;
const V: usize = 3;
const A: usize = 4;
const W: usize = 5;

/// Term weights of `J = λ_o J_o + λ_eq J_eq + λ_ie J_ie`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub lambda_o: f64,
    pub lambda_eq: f64,
    pub lambda_ie: f64,
    pub delta_t: f64,
    pub delta_kappa: f64,
    pub delta_s: f64,
    pub delta_v: f64,
    pub x_j: f64,
}

impl Weights {
    /// Weights from `config` with the penalty weights multiplied by continuation scales.
    pub fn from_config(config: &PlannerConfig, eq_scale: f64, ie_scale: f64) -> Self {
        Self {
            lambda_o: config.lambda_o,
            lambda_eq: config.lambda_eq * eq_scale,
            lambda_ie: config.lambda_ie * ie_scale,
            delta_t: config.delta_t,
            delta_kappa: config.delta_kappa,
            delta_s: config.delta_s,
            delta_v: config.delta_v,
            x_j: config.x_j,
        }
    }
}

/// Unweighted values of each objective term.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CostBreakdown {
    /// `J_o`, including the `δ_t` time term.
    pub smoothness: f64,
    pub equality: f64,
    /// `δ_κ`-weighted curvature part of `J_ie`.
    pub curvature: f64,
    /// `δ_s`-weighted safety part of `J_ie`.
    pub safety: f64,
    /// `δ_v`-weighted gear part of `J_ie`.
    pub gear: f64,
}

impl CostBreakdown {
    pub fn inequality(&self) -> f64 {
        self.curvature + self.safety + self.gear
    }

    pub fn total(&self, w: &Weights) -> f64 {
        w.lambda_o * self.smoothness + w.lambda_eq * self.equality + w.lambda_ie * self.inequality()
    }
}

/// Objective over the packed variables of a fixed-size trajectory.
#[derive(Debug, Clone)]
pub struct CostModel<'a> {
    pub start: State,
    pub goal: State,
    pub corridor: &'a Corridor,
    pub weights: Weights,
    pub kappa_max: f64,
    pub disc_offset: f64,
    states: usize,
}

impl<'a> CostModel<'a> {
    pub fn new(
        start: State,
        goal: State,
        corridor: &'a Corridor,
        weights: Weights,
        kappa_max: f64,
        disc_offset: f64,
    ) -> Self {
        Self {
            start,
            goal,
            corridor,
            weights,
            kappa_max,
            disc_offset,
            states: corridor.state_count(),
        }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn dimension(&self) -> usize {
        Trajectory::packed_len(self.states)
    }

    /// Per-term values at `packed`.
    pub fn breakdown(&self, packed: &[f64]) -> CostBreakdown {
        let mut scratch = vec![0.0; packed.len()];
        self.accumulate(packed, &mut scratch)
    }

    /// Objective value, writing the gradient into `grad`.
    pub fn evaluate(&self, packed: &[f64], grad: &mut [f64]) -> f64 {
        self.accumulate(packed, grad).total(&self.weights)
    }

    fn accumulate(&self, x: &[f64], g: &mut [f64]) -> CostBreakdown {
        debug_assert_eq!(x.len(), self.dimension());
        g.iter_mut().for_each(|v| *v = 0.0);
        let w = &self.weights;
        let ns = self.states;
        let n = ns - 1;
        let tb = STATE_BLOCK * ns;
        let at = |k: usize, f: usize| STATE_BLOCK * k + f;
        let mut out = CostBreakdown::default();

        // Smoothness and time.
        for i in 0..n {
            let t = x[tb + i];
            let da = x[at(i + 1, A)] - x[at(i, A)];
            let dw = x[at(i + 1, W)] - x[at(i, W)];
            let q = da * da + dw * dw;
            out.smoothness += q / t + w.delta_t * t;
            let c = w.lambda_o;
            g[at(i + 1, A)] += c * 2.0 * da / t;
            g[at(i, A)] -= c * 2.0 * da / t;
            g[at(i + 1, W)] += c * 2.0 * dw / t;
            g[at(i, W)] -= c * 2.0 * dw / t;
            g[tb + i] += c * (w.delta_t - q / (t * t));
        }

        // Transition residuals.
        let c = w.lambda_eq;
        for i in 0..n {
            let t = x[tb + i];
            let (xi, yi, thi, vi) = (x[at(i, X)], x[at(i, Y)], x[at(i, TH)], x[at(i, V)]);
            let (a0, w0, a1, w1) = (x[at(i, A)], x[at(i, W)], x[at(i + 1, A)], x[at(i + 1, W)]);
            let s = State::new(xi, yi, thi, vi);
            let p = transition_unchecked(&s, a0, w0, a1, w1, t);
            let next = State::new(x[at(i + 1, X)], x[at(i + 1, Y)], x[at(i + 1, TH)], x[at(i + 1, V)]);
            let r = next.residual(&p);
            out.equality += r.iter().map(|e| e * e).sum::<f64>();

            // Adjoints of the residual w.r.t. the predicted state (2c r, sign folded in below).
            let (px, py, pv) = (2.0 * c * r[0], 2.0 * c * r[1], 2.0 * c * r[4]);
            let (s1, c1) = (p.theta.sin(), p.theta.cos());
            let (sn, cn) = (next.theta.sin(), next.theta.cos());
            let pth = 2.0 * c * (r[2] * c1 - r[3] * s1);
            g[at(i + 1, X)] += px;
            g[at(i + 1, Y)] += py;
            g[at(i + 1, TH)] += 2.0 * c * (r[2] * cn - r[3] * sn);
            g[at(i + 1, V)] += pv;

            let (s0, c0) = (thi.sin(), thi.cos());
            let av = pv + (px * c1 + py * s1) * 0.5 * t;
            let ath = pth + (-px * p.v * s1 + py * p.v * c1) * 0.5 * t;
            g[at(i, X)] -= px;
            g[at(i, Y)] -= py;
            g[at(i, TH)] -= ath + (-px * vi * s0 + py * vi * c0) * 0.5 * t;
            g[at(i, V)] -= av + (px * c0 + py * s0) * 0.5 * t;
            g[at(i, A)] -= av * 0.5 * t;
            g[at(i + 1, A)] -= av * 0.5 * t;
            g[at(i, W)] -= ath * 0.5 * t;
            g[at(i + 1, W)] -= ath * 0.5 * t;
            g[tb + i] -= av * 0.5 * (a0 + a1)
                + ath * 0.5 * (w0 + w1)
                + 0.5 * (px * (vi * c0 + p.v * c1) + py * (vi * s0 + p.v * s1));
        }

        // Start and goal.
        for (k, target) in [(0, self.start), (n, self.goal)] {
            let s = State::new(x[at(k, X)], x[at(k, Y)], x[at(k, TH)], x[at(k, V)]);
            let r = s.residual(&target);
            out.equality += r.iter().map(|e| e * e).sum::<f64>();
            g[at(k, X)] += 2.0 * c * r[0];
            g[at(k, Y)] += 2.0 * c * r[1];
            g[at(k, TH)] += 2.0 * c * (r[2] * s.theta.cos() - r[3] * s.theta.sin());
            g[at(k, V)] += 2.0 * c * r[4];
        }

        // Curvature.
        let k2 = self.kappa_max * self.kappa_max;
        let c = w.lambda_ie * w.delta_kappa;
        for k in 0..ns {
            let (v, om) = (x[at(k, V)], x[at(k, W)]);
            let arg = om * om - v * v * k2;
            out.curvature += w.delta_kappa * penalty_l(arg, w.x_j);
            let d = c * penalty_l_grad(arg, w.x_j);
            g[at(k, W)] += d * 2.0 * om;
            g[at(k, V)] -= d * 2.0 * v * k2;
        }

        // Gear shifting.
        let c = w.lambda_ie * w.delta_v;
        for k in 0..n {
            let (v0, v1) = (x[at(k, V)], x[at(k + 1, V)]);
            let arg = -v0 * v1;
            out.gear += w.delta_v * penalty_l(arg, w.x_j);
            let d = c * penalty_l_grad(arg, w.x_j);
            g[at(k, V)] -= d * v1;
            g[at(k + 1, V)] -= d * v0;
        }

        // Safety: both discs of every state against its polygon, and each polygon's last
        // state against the next polygon.
        let polys = self.corridor.polygons();
        for (p, range) in self.corridor.assignment().iter().enumerate() {
            for k in range.clone() {
                out.safety += self.disc_penalty(&polys[p], k, x, g);
            }
            if p + 1 < polys.len() {
                out.safety += self.disc_penalty(&polys[p + 1], range.end - 1, x, g);
            }
        }
        out
    }

    fn disc_penalty(&self, poly: &HPolygon, k: usize, x: &[f64], g: &mut [f64]) -> f64 {
        let w = &self.weights;
        let c = w.lambda_ie * w.delta_s;
        let b = STATE_BLOCK * k;
        let (px, py, th) = (x[b + X], x[b + Y], x[b + TH]);
        let (s, co) = (th.sin(), th.cos());
        let l = self.disc_offset;
        let front = [px + l * co, py + l * s];
        let mut total = 0.0;
        for (n, off) in poly.normals().iter().zip(poly.offsets()) {
            for (o, is_front) in [([px, py], false), (front, true)] {
                let arg = n[0] * o[0] + n[1] * o[1] - off;
                if arg <= 0.0 {
                    continue;
                }
                total += w.delta_s * penalty_l(arg, w.x_j);
                let d = c * penalty_l_grad(arg, w.x_j);
                g[b + X] += d * n[0];
                g[b + Y] += d * n[1];
                if is_front {
                    g[b + TH] += d * l * (-n[0] * s + n[1] * co);
                }
            }
        }
        total
    }
}

/// `Σ (Δa² + Δω²)/t_i + δ_t t_i`.
pub fn objective_smoothness_time(traj: &Trajectory, delta_t: f64) -> f64 {
    traj.points()
        .windows(2)
        .map(|w| {
            let (p, q) = (&w[0], &w[1]);
            ((q.a - p.a).powi(2) + (q.omega - p.omega).powi(2)) / p.t + delta_t * p.t
        })
        .sum()
}

/// Squared transition residuals plus squared start and goal residuals.
pub fn equality_penalty(traj: &Trajectory, start: &State, goal: &State) -> f64 {
    let sq = |r: [f64; 5]| r.iter().map(|e| e * e).sum::<f64>();
    let pts = traj.points();
    let mut total = sq(pts[0].state().residual(start)) + sq(traj.last().state().residual(goal));
    for w in pts.windows(2) {
        let pred = transition_unchecked(&w[0].state(), w[0].a, w[0].omega, w[1].a, w[1].omega, w[0].t);
        total += sq(w[1].state().residual(&pred));
    }
    total
}

/// Weighted curvature, safety and gear penalties (`J_ie` without `λ_ie`).
pub fn inequality_penalty(traj: &Trajectory, corridor: &Corridor, config: &PlannerConfig) -> f64 {
    let model = CostModel::new(
        State::new(0.0, 0.0, 0.0, 0.0),
        State::new(0.0, 0.0, 0.0, 0.0),
        corridor,
        Weights::from_config(config, 1.0, 1.0),
        config.kappa_max,
        config.disc_offset,
    );
    model.breakdown(&traj.pack()).inequality()
}

/// Full objective and gradient with finiteness checks.
pub fn full_objective_and_gradient(
    model: &CostModel,
    packed: &[f64],
) -> Result<(f64, Vec<f64>), OptimizerError> {
    let expected = model.dimension();
    if packed.len() != expected {
        return Err(OptimizerError::PackedLength {
            expected,
            found: packed.len(),
        });
    }
    if let Some(index) = packed.iter().position(|v| !v.is_finite()) {
        return Err(OptimizerError::NonFiniteVariable { index });
    }
    let tb = STATE_BLOCK * model.states();
    if let Some(i) = packed[tb..].iter().position(|t| !(*t > 0.0)) {
        return Err(OptimizerError::NonPositiveInterval {
            index: i,
            value: packed[tb + i],
        });
    }
    let mut grad = vec![0.0; packed.len()];
    let value = model.evaluate(packed, &mut grad);
    if let Some(index) = grad.iter().position(|v| !v.is_finite()) {
        return Err(OptimizerError::NonFiniteGradient { index });
    }
    if !value.is_finite() {
        return Err(OptimizerError::NonFiniteValue);
    }
    Ok((value, grad))
}

/// Constraint residuals recomputed from a trajectory.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Residuals {
    /// Largest Euclidean norm of a transition, start or goal residual vector.
    pub equality: f64,
    /// Largest half-space violation of either disc, junctions included (m).
    pub safety: f64,
    /// Largest `|ω|/|v| − κ_max` over states with `|v| > 0.1`.
    pub curvature: f64,
    /// Largest `−v_i v_{i+1}`.
    pub gear: f64,
}

/// Speed below which the curvature ratio is not checked.
pub const CURVATURE_MIN_SPEED: f64 = 0.1;

pub fn residuals(
    traj: &Trajectory,
    start: &State,
    goal: &State,
    corridor: &Corridor,
    kappa_max: f64,
    disc_offset: f64,
) -> Residuals {
    let norm = |r: [f64; 5]| r.iter().map(|e| e * e).sum::<f64>().sqrt();
    let pts = traj.points();
    let mut out = Residuals {
        equality: norm(pts[0].state().residual(start)).max(norm(traj.last().state().residual(goal))),
        ..Default::default()
    };
    for w in pts.windows(2) {
        let pred = transition_unchecked(&w[0].state(), w[0].a, w[0].omega, w[1].a, w[1].omega, w[0].t);
        out.equality = out.equality.max(norm(w[1].state().residual(&pred)));
        out.gear = out.gear.max(-w[0].v * w[1].v);
    }
    for p in pts {
        if p.v.abs() > CURVATURE_MIN_SPEED {
            out.curvature = out.curvature.max(p.omega.abs() / p.v.abs() - kappa_max);
        }
    }
    let polys = corridor.polygons();
    let check = |poly: &HPolygon, k: usize| {
        let s = pts[k].state();
        poly.violation(s.position()).max(poly.violation(s.front(disc_offset)))
    };
    for (p, range) in corridor.assignment().iter().enumerate() {
        for k in range.clone() {
            out.safety = out.safety.max(check(&polys[p], k));
        }
        if p + 1 < polys.len() {
            out.safety = out.safety.max(check(&polys[p + 1], range.end - 1));
        }
    }
    out.safety = out.safety.max(0.0);
    out.curvature = out.curvature.max(0.0);
    out.gear = out.gear.max(0.0);
    out
}
