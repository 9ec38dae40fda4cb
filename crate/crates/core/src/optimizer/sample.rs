use serde::Serialize;

use crate::error::OptimizerError;
use crate::path::CoarsePath;

use super::config::PlannerConfig;
use super::model::{State, Trajectory, TrajectoryPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DenseSample {
    pub time: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub a: f64,
    /// Constant jerk of the interval the sample belongs to.
    pub jerk: f64,
    pub omega: f64,
}

/// State `tau` seconds into interval `i`, with linear `a` and `ω`, exact `v` and `θ`,
/// and `x`, `y` integrated with Simpson steps no longer than `max_step`.
fn state_in_interval(p: &TrajectoryPoint, q: &TrajectoryPoint, tau: f64, max_step: f64) -> DenseSample {
    let jerk = (q.a - p.a) / p.t;
    let alpha = (q.omega - p.omega) / p.t;
    let v = |s: f64| p.v + p.a * s + 0.5 * jerk * s * s;
    let th = |s: f64| p.theta + p.omega * s + 0.5 * alpha * s * s;
    let steps = (tau / max_step).ceil().max(1.0) as usize;
    let h = tau / steps as f64;
    let (mut x, mut y) = (p.x, p.y);
    for k in 0..steps {
        let s0 = k as f64 * h;
        let (s1, s2) = (s0 + 0.5 * h, s0 + h);
        let fx = |s: f64| v(s) * th(s).cos();
        let fy = |s: f64| v(s) * th(s).sin();
        x += h / 6.0 * (fx(s0) + 4.0 * fx(s1) + fx(s2));
        y += h / 6.0 * (fy(s0) + 4.0 * fy(s1) + fy(s2));
    }
    DenseSample {
        time: tau,
        x,
        y,
        theta: th(tau),
        v: v(tau),
        a: p.a + jerk * tau,
        jerk,
        omega: p.omega + alpha * tau,
    }
}

/// Dense samples every `dt` seconds, restarting the sample clock at each knot so every
/// knot is reproduced exactly.
pub fn sample_trajectory(traj: &Trajectory, dt: f64) -> Vec<DenseSample> {
    assert!(dt > 0.0, "sample period must be positive");
    let pts = traj.points();
    let mut out = Vec::new();
    let mut t0 = 0.0;
    for w in pts.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        let mut k = 0;
        loop {
            let tau = k as f64 * dt;
            if tau >= p.t - 1e-12 && k > 0 {
                break;
            }
            let mut s = state_in_interval(p, q, tau, dt / 4.0);
            if k == 0 {
                s.x = p.x;
                s.y = p.y;
                s.theta = p.theta;
                s.v = p.v;
            }
            s.time = t0 + tau;
            out.push(s);
            k += 1;
        }
        t0 += p.t;
    }
    let last = traj.last();
    let prev = &pts[pts.len() - 2];
    out.push(DenseSample {
        time: t0,
        x: last.x,
        y: last.y,
        theta: last.theta,
        v: last.v,
        a: last.a,
        jerk: (last.a - prev.a) / prev.t,
        omega: last.omega,
    });
    out
}

/// Mean and max of `|v|`, `|a|` and `|jerk|` over dense samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub mean_v: f64,
    pub max_v: f64,
    pub mean_a: f64,
    pub max_a: f64,
    pub mean_jerk: f64,
    pub max_jerk: f64,
}

pub fn metrics(samples: &[DenseSample]) -> Metrics {
    assert!(samples.len() >= 2, "metrics need at least two samples");
    let n = samples.len() as f64;
    let stat = |f: &dyn Fn(&DenseSample) -> f64| {
        let (sum, max) = samples
            .iter()
            .map(|s| f(s).abs())
            .fold((0.0, 0.0f64), |(s, m), v| (s + v, m.max(v)));
        (sum / n, max)
    };
    let (mean_v, max_v) = stat(&|s| s.v);
    let (mean_a, max_a) = stat(&|s| s.a);
    let (mean_jerk, max_jerk) = stat(&|s| s.jerk);
    Metrics {
        mean_v,
        max_v,
        mean_a,
        max_a,
        mean_jerk,
        max_jerk,
    }
}

impl Trajectory {
    /// Trajectory remaining `offset` seconds after the start.
    ///
    /// The first point is the sampled state at `offset`; later knots are kept. A leftover
    /// interval shorter than `min_interval` is merged into the next knot.
    pub fn advance(&self, offset: f64, min_interval: f64) -> Result<Trajectory, OptimizerError> {
        let duration = self.duration();
        if !(offset >= 0.0) || offset >= duration {
            return Err(OptimizerError::OffsetOutOfRange { offset, duration });
        }
        if offset == 0.0 {
            return Ok(self.clone());
        }
        let pts = self.points();
        let mut t0 = 0.0;
        let mut i = 0;
        while t0 + pts[i].t <= offset {
            t0 += pts[i].t;
            i += 1;
        }
        let tau = offset - t0;
        let (p, q) = (&pts[i], &pts[i + 1]);
        let remaining = p.t - tau;
        let mut out = Vec::with_capacity(pts.len() - i);
        if remaining >= min_interval || i + 2 >= pts.len() {
            let s = state_in_interval(p, q, tau, 0.01);
            out.push(TrajectoryPoint {
                x: s.x,
                y: s.y,
                theta: s.theta,
                v: s.v,
                a: s.a,
                omega: s.omega,
                t: remaining,
            });
        } else {
            // Too close to the next knot: start from the state at `offset` but keep the
            // next knot's interval.
            let s = state_in_interval(p, q, tau, 0.01);
            out.push(TrajectoryPoint {
                x: s.x,
                y: s.y,
                theta: s.theta,
                v: s.v,
                a: s.a,
                omega: s.omega,
                t: q.t + remaining,
            });
            i += 1;
        }
        out.extend_from_slice(&pts[i + 1..]);
        Trajectory::new(out)
    }

    /// State at `offset` seconds after the start.
    pub fn state_at(&self, offset: f64) -> Result<State, OptimizerError> {
        Ok(self.advance(offset, 0.0)?.first().state())
    }
}

/// Reference timing of a coarse path: each constant-gear run gets a trapezoidal speed
/// profile (accelerate at `a_max`, cruise at the speed limit, brake at `a_max`), with the
/// profile's acceleration at every pose.
pub fn naive_time_parameterization(path: &CoarsePath, config: &PlannerConfig) -> Result<Trajectory, OptimizerError> {
    let poses = path.poses();
    if poses.len() < 2 {
        return Err(OptimizerError::TooFewStates);
    }
    let n = poses.len() - 1;
    let mut anchors = vec![0];
    anchors.extend(path.gear_switches());
    anchors.push(n);

    let mut v = vec![0.0; n + 1];
    let mut a = vec![0.0; n + 1];
    for run in anchors.windows(2) {
        let (s, e) = (run[0], run[1]);
        let sign = poses[s + 1].direction.sign();
        let vmax = if sign > 0.0 { config.v_max } else { -config.v_min };
        let amax = config.a_max.min(-config.a_min);
        let mut arc = vec![0.0];
        for k in s..e {
            arc.push(arc.last().unwrap() + poses[k].distance(&poses[k + 1]));
        }
        let total = *arc.last().unwrap();
        for (j, k) in (s..=e).enumerate() {
            let up = (2.0 * amax * arc[j]).sqrt();
            let down = (2.0 * amax * (total - arc[j])).sqrt();
            let speed = up.min(down).min(vmax);
            v[k] = sign * speed;
            // Acceleration of the profile: rising, cruising or braking.
            let acc = if speed >= vmax {
                0.0
            } else if up < down {
                amax
            } else if down < up {
                -amax
            } else {
                0.0
            };
            a[k] = sign * acc;
        }
    }
    let mut points: Vec<TrajectoryPoint> = (0..=n)
        .map(|k| TrajectoryPoint {
            x: poses[k].x,
            y: poses[k].y,
            theta: poses[k].theta,
            v: v[k],
            a: a[k],
            omega: 0.0,
            t: 0.0,
        })
        .collect();
    for i in 0..n {
        let len = poses[i].distance(&poses[i + 1]);
        let mean = 0.5 * (v[i].abs() + v[i + 1].abs());
        let t = if mean > 1e-9 { len / mean } else { config.t_min };
        points[i].t = t.max(config.t_min);
        points[i].omega = crate::path::angle_diff(poses[i + 1].theta, poses[i].theta) / points[i].t;
    }
    Trajectory::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::Pose;

    fn pt(x: f64, v: f64, a: f64, t: f64) -> TrajectoryPoint {
        TrajectoryPoint {
            x,
            y: 0.0,
            theta: 0.0,
            v,
            a,
            omega: 0.0,
            t,
        }
    }

    #[test]
    fn constant_speed_line() {
        let traj = Trajectory::new(vec![pt(0.0, 2.0, 0.0, 1.0), pt(2.0, 2.0, 0.0, 1.0), pt(4.0, 2.0, 0.0, 0.0)]).unwrap();
        let s = sample_trajectory(&traj, 0.25);
        assert_eq!(s.len(), 9);
        for w in s.windows(2) {
            assert!((w[1].x - w[0].x - 0.5).abs() < 1e-12);
            assert_eq!(w[1].y, 0.0);
        }
        let m = metrics(&s);
        assert_eq!((m.max_a, m.mean_a, m.max_jerk, m.mean_jerk), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(m.max_v, 2.0);
    }

    #[test]
    fn speed_is_quadratic_within_interval() {
        let traj = Trajectory::new(vec![pt(0.0, 0.0, 0.0, 1.0), pt(0.0, 0.5, 1.0, 0.0)]).unwrap();
        let s = sample_trajectory(&traj, 0.5);
        assert_eq!(s.len(), 3);
        assert!((s[1].v - 0.125).abs() < 1e-15);
        assert_eq!(s[1].jerk, 1.0);
        assert_eq!(metrics(&s).max_jerk, 1.0);
    }

    #[test]
    fn coarse_period_gives_knots_only() {
        let traj = Trajectory::new(vec![pt(0.0, 1.0, 0.0, 0.5), pt(0.5, 1.0, 0.0, 0.7), pt(1.2, 1.0, 0.0, 0.0)]).unwrap();
        let s = sample_trajectory(&traj, 10.0);
        let times: Vec<f64> = s.iter().map(|d| d.time).collect();
        assert_eq!(times, vec![0.0, 0.5, 1.2]);
        assert_eq!(s[1].x, 0.5);
    }

    #[test]
    fn integration_matches_closed_form_arc() {
        // Constant speed and turn rate trace a circle; the dense sampler must land on it.
        let (v, w, t) = (1.5, 0.4, 2.0);
        let p = TrajectoryPoint {
            x: 0.0,
            y: 0.0,
            theta: 0.0,
            v,
            a: 0.0,
            omega: w,
            t,
        };
        let q = TrajectoryPoint { t: 0.0, x: 0.0, ..p };
        let s = state_in_interval(&p, &q, t, 0.05);
        assert!((s.x - v / w * (w * t).sin()).abs() < 1e-9);
        assert!((s.y - v / w * (1.0 - (w * t).cos())).abs() < 1e-9);
    }

    #[test]
    fn advance_cuts_inside_interval() {
        let traj = Trajectory::new(vec![pt(0.0, 1.0, 0.0, 1.0), pt(1.0, 1.0, 0.0, 1.0), pt(2.0, 1.0, 0.0, 0.0)]).unwrap();
        let adv = traj.advance(0.5, 0.01).unwrap();
        assert_eq!(adv.len(), 3);
        assert!((adv.first().x - 0.5).abs() < 1e-12);
        assert!((adv.duration() - 1.5).abs() < 1e-12);
        assert_eq!(traj.advance(0.0, 0.01).unwrap(), traj);
        assert!(traj.advance(2.5, 0.01).is_err());
        let merged = traj.advance(0.999, 0.01).unwrap();
        assert_eq!(merged.len(), 2);
        assert!((merged.duration() - 1.001).abs() < 1e-12);
    }

    #[test]
    fn naive_profile_is_trapezoidal() {
        let path = CoarsePath::new((0..=20).map(|k| Pose::forward(k as f64, 0.0, 0.0)).collect());
        let cfg = PlannerConfig::default();
        let traj = naive_time_parameterization(&path, &cfg).unwrap();
        let v: Vec<f64> = traj.points().iter().map(|p| p.v).collect();
        assert_eq!(v[0], 0.0);
        assert_eq!(v[10], 3.0);
        assert_eq!(v[20], 0.0);
        assert!((v[1] - 2.0).abs() < 1e-12);
        assert_eq!(traj.points()[1].a, 2.0);
        assert_eq!(traj.points()[10].a, 0.0);
        assert_eq!(traj.points()[19].a, -2.0);
    }
}
