use serde::{Deserialize, Serialize};

use crate::error::OptimizerError;
use crate::path::{angle_diff, CoarsePath, Direction, Pose};

/// Packed variables per state: x, y, θ, v, a, ω.
pub const STATE_BLOCK: usize = 6;

/// Kinematic state `[x, y, θ, v]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
}

impl State {
    pub fn new(x: f64, y: f64, theta: f64, v: f64) -> Self {
        Self { x, y, theta, v }
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    /// Center of the front disc.
    pub fn front(&self, offset: f64) -> [f64; 2] {
        [
            self.x + offset * self.theta.cos(),
            self.y + offset * self.theta.sin(),
        ]
    }

    /// Residual `[dx, dy, dsin θ, dcos θ, dv]` of `self` against `other`.
    pub fn residual(&self, other: &State) -> [f64; 5] {
        let (ds, dc) = angle_residual(self.theta, other.theta);
        [
            self.x - other.x,
            self.y - other.y,
            ds,
            dc,
            self.v - other.v,
        ]
    }

    pub fn pose(&self, direction: Direction) -> Pose {
        Pose::new(self.x, self.y, self.theta, direction)
    }
}

/// `(sin a − sin b, cos a − cos b)`; both vanish exactly when `a` and `b` name the same
/// heading.
pub fn angle_residual(a: f64, b: f64) -> (f64, f64) {
    (a.sin() - b.sin(), a.cos() - b.cos())
}

/// State after one interval of `t` seconds with linearly varying controls.
///
/// Speed and heading integrate the trapezoid of their rates; position integrates the
/// trapezoid of the velocity vectors at both ends.
pub fn transition(
    s: &State,
    a0: f64,
    w0: f64,
    a1: f64,
    w1: f64,
    t: f64,
) -> Result<State, OptimizerError> {
    if !(t > 0.0) {
        return Err(OptimizerError::NonPositiveInterval { index: 0, value: t });
    }
    Ok(transition_unchecked(s, a0, w0, a1, w1, t))
}

pub(crate) fn transition_unchecked(s: &State, a0: f64, w0: f64, a1: f64, w1: f64, t: f64) -> State {
    let v1 = s.v + 0.5 * (a0 + a1) * t;
    let th1 = s.theta + 0.5 * (w0 + w1) * t;
    State {
        x: s.x + 0.5 * (s.v * s.theta.cos() + v1 * th1.cos()) * t,
        y: s.y + 0.5 * (s.v * s.theta.sin() + v1 * th1.sin()) * t,
        theta: th1,
        v: v1,
    }
}

/// One discrete state with its controls and the interval to the next state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub a: f64,
    pub omega: f64,
    /// Interval to the next point; unused on the last point.
    pub t: f64,
}

impl TrajectoryPoint {
    pub fn state(&self) -> State {
        State::new(self.x, self.y, self.theta, self.v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    /// Requires at least two points and positive intervals on all but the last.
    pub fn new(points: Vec<TrajectoryPoint>) -> Result<Self, OptimizerError> {
        if points.len() < 2 {
            return Err(OptimizerError::TooFewStates);
        }
        for (index, p) in points[..points.len() - 1].iter().enumerate() {
            if !(p.t > 0.0) {
                return Err(OptimizerError::NonPositiveInterval {
                    index,
                    value: p.t,
                });
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[TrajectoryPoint] {
        &self.points
    }

    /// Interval count `n`; there are `n + 1` points.
    pub fn intervals(&self) -> usize {
        self.points.len() - 1
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> &TrajectoryPoint {
        &self.points[0]
    }

    pub fn last(&self) -> &TrajectoryPoint {
        &self.points[self.points.len() - 1]
    }

    pub fn duration(&self) -> f64 {
        self.points[..self.intervals()].iter().map(|p| p.t).sum()
    }

    /// Knot times starting at 0.
    pub fn knot_times(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.len());
        for p in &self.points {
            out.push(acc);
            acc += p.t;
        }
        out
    }

    pub fn packed_len(states: usize) -> usize {
        STATE_BLOCK * states + states - 1
    }

    /// `[x, y, θ, v, a, ω]` per state, then every interval.
    pub fn pack(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(Self::packed_len(self.len()));
        for p in &self.points {
            out.extend_from_slice(&[p.x, p.y, p.theta, p.v, p.a, p.omega]);
        }
        out.extend(self.points[..self.intervals()].iter().map(|p| p.t));
        out
    }

    /// Inverse of [`Trajectory::pack`] for `states` states.
    pub fn unpack(states: usize, packed: &[f64]) -> Result<Self, OptimizerError> {
        if states < 2 {
            return Err(OptimizerError::TooFewStates);
        }
        let expected = Self::packed_len(states);
        if packed.len() != expected {
            return Err(OptimizerError::PackedLength {
                expected,
                found: packed.len(),
            });
        }
        let base = STATE_BLOCK * states;
        let points = (0..states)
            .map(|k| {
                let b = &packed[STATE_BLOCK * k..STATE_BLOCK * (k + 1)];
                TrajectoryPoint {
                    x: b[0],
                    y: b[1],
                    theta: b[2],
                    v: b[3],
                    a: b[4],
                    omega: b[5],
                    t: if k + 1 < states { packed[base + k] } else { 0.0 },
                }
            })
            .collect();
        Self::new(points)
    }

    /// Positions as a coarse path, gear taken from the sign of the speed.
    pub fn to_path(&self) -> CoarsePath {
        let gear = |v: f64| {
            if v < 0.0 {
                Direction::Reverse
            } else {
                Direction::Forward
            }
        };
        let n = self.len();
        let poses = (0..n)
            .map(|k| {
                // Gear of the motion arriving at k; for k = 0, the motion leaving it.
                let v = match k {
                    0 => self.points[0].v + self.points[1].v,
                    _ => self.points[k - 1].v + self.points[k].v,
                };
                self.points[k].state().pose(gear(v))
            })
            .collect();
        CoarsePath::new(poses)
    }

    /// Resamples to `states` states by linear interpolation along cumulative arc length,
    /// rescaling intervals so the duration is preserved.
    pub fn resample(&self, states: usize) -> Result<Trajectory, OptimizerError> {
        if states < 2 {
            return Err(OptimizerError::TooFewStates);
        }
        if states == self.len() {
            return Ok(self.clone());
        }
        let mut arc = vec![0.0];
        for w in self.points.windows(2) {
            let d = (w[1].x - w[0].x).hypot(w[1].y - w[0].y);
            arc.push(arc.last().unwrap() + d);
        }
        let total = *arc.last().unwrap();
        // Degenerate geometry: fall back to time as the parameter.
        let param: Vec<f64> = if total > 1e-9 { arc } else { self.knot_times() };
        let span = *param.last().unwrap();
        let duration = self.duration();
        let mut seg = 0;
        let mut points: Vec<TrajectoryPoint> = (0..states)
            .map(|k| {
                let target = span * k as f64 / (states - 1) as f64;
                while seg + 2 < param.len() && param[seg + 1] < target {
                    seg += 1;
                }
                let (p, q) = (&self.points[seg], &self.points[seg + 1]);
                let width = param[seg + 1] - param[seg];
                let f = if width > 0.0 {
                    ((target - param[seg]) / width).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let lerp = |a: f64, b: f64| a + f * (b - a);
                TrajectoryPoint {
                    x: lerp(p.x, q.x),
                    y: lerp(p.y, q.y),
                    theta: p.theta + f * angle_diff(q.theta, p.theta),
                    v: lerp(p.v, q.v),
                    a: lerp(p.a, q.a),
                    omega: lerp(p.omega, q.omega),
                    t: 0.0,
                }
            })
            .collect();
        let dt = duration / (states - 1) as f64;
        let n = points.len();
        for p in &mut points[..n - 1] {
            p.t = dt;
        }
        Trajectory::new(points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn angle_residual_examples() {
        let (s, c) = angle_residual(PI, -PI);
        assert!(s.abs() < 1e-15 && c.abs() < 1e-15);
        assert_eq!(angle_residual(1.3, 1.3), (0.0, 0.0));
        let (s, c) = angle_residual(0.0, PI / 2.0);
        assert!((s + 1.0).abs() < 1e-15 && (c - 1.0).abs() < 1e-15);
    }

    #[test]
    fn transition_examples() {
        let s = State::new(0.0, 0.0, 0.0, 1.0);
        assert_eq!(transition(&s, 0.0, 0.0, 0.0, 0.0, 2.0).unwrap(), State::new(2.0, 0.0, 0.0, 1.0));
        assert_eq!(transition(&s, 0.0, 0.0, 1.0, 0.0, 1.0).unwrap().v, 1.5);
        let s0 = State::new(0.0, 0.0, 0.0, 0.0);
        assert_eq!(transition(&s0, 0.0, 0.0, 0.0, PI, 1.0).unwrap().theta, PI / 2.0);
        assert!(transition(&s, 0.0, 0.0, 0.0, 0.0, 0.0).is_err());
    }

    fn sample() -> Trajectory {
        Trajectory::new(
            (0..4)
                .map(|k| TrajectoryPoint {
                    x: k as f64,
                    y: 0.5 * k as f64,
                    theta: 0.1 * k as f64,
                    v: 1.0 + k as f64,
                    a: -0.5,
                    omega: 0.2,
                    t: 0.5 + 0.1 * k as f64,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn pack_round_trip() {
        let traj = sample();
        let packed = traj.pack();
        assert_eq!(packed.len(), 6 * 4 + 3);
        let mut back = Trajectory::unpack(4, &packed).unwrap();
        assert_eq!(back.points[..3], traj.points[..3]);
        back.points[3].t = traj.points[3].t;
        assert_eq!(back, traj);
        assert!(matches!(
            Trajectory::unpack(4, &packed[1..]),
            Err(OptimizerError::PackedLength { .. })
        ));
    }

    #[test]
    fn validation() {
        let p = sample().points[0];
        assert_eq!(Trajectory::new(vec![p]).unwrap_err(), OptimizerError::TooFewStates);
        let mut q = p;
        q.t = 0.0;
        assert!(matches!(
            Trajectory::new(vec![q, p]),
            Err(OptimizerError::NonPositiveInterval { index: 0, .. })
        ));
    }

    #[test]
    fn resample_preserves_endpoints_and_duration() {
        let traj = sample();
        let r = traj.resample(7).unwrap();
        assert_eq!(r.len(), 7);
        assert!((r.duration() - traj.duration()).abs() < 1e-12);
        assert_eq!(r.first().x, 0.0);
        assert!((r.last().x - 3.0).abs() < 1e-12);
        assert_eq!(traj.resample(4).unwrap(), traj);
    }
}
