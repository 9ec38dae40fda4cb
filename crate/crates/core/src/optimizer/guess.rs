use crate::error::OptimizerError;
use crate::path::{angle_diff, CoarsePath};

use super::config::PlannerConfig;
use super::model::{Trajectory, TrajectoryPoint};

/// Initial trajectory along a (resampled) coarse path.
///
/// Speeds are `±v_max / 2` by gear and zero at the endpoints and gear switches,
/// accelerations are zero, intervals assume half the top speed, and turn rates follow
/// the wrapped heading changes.
pub fn initial_guess(path: &CoarsePath, config: &PlannerConfig) -> Result<Trajectory, OptimizerError> {
    let poses = path.poses();
    if poses.len() < 2 {
        return Err(OptimizerError::TooFewStates);
    }
    let n = poses.len() - 1;
    let cruise = 0.5 * config.v_max;
    let mut points: Vec<TrajectoryPoint> = poses
        .iter()
        .enumerate()
        .map(|(k, p)| {
            // Gear of the motion leaving pose k (arriving, for the last pose).
            let gear = poses[(k + 1).min(n)].direction;
            let v = if k == 0 || k == n || path.is_gear_switch(k) {
                0.0
            } else {
                gear.sign() * cruise
            };
            TrajectoryPoint {
                x: p.x,
                y: p.y,
                theta: p.theta,
                v,
                a: 0.0,
                omega: 0.0,
                t: 0.0,
            }
        })
        .collect();
    for i in 0..n {
        let len = poses[i].distance(&poses[i + 1]);
        let t = (len / cruise).max(config.t_min).min(config.t_max);
        points[i].t = t;
        points[i].omega = angle_diff(poses[i + 1].theta, poses[i].theta) / t;
    }
    Trajectory::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{Direction, Pose};

    #[test]
    fn straight_eight_meters() {
        let path = CoarsePath::new((0..=8).map(|k| Pose::forward(k as f64, 0.0, 0.0)).collect());
        let g = initial_guess(&path, &PlannerConfig::default()).unwrap();
        assert_eq!(g.len(), 9);
        for (k, p) in g.points().iter().enumerate() {
            let expected = if k == 0 || k == 8 { 0.0 } else { 1.5 };
            assert_eq!(p.v, expected);
            assert_eq!(p.a, 0.0);
        }
        for p in &g.points()[..8] {
            assert!((p.t - 2.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gear_switch_pose_stops() {
        let path = CoarsePath::new(vec![
            Pose::forward(0.0, 0.0, 0.0),
            Pose::forward(1.0, 0.0, 0.0),
            Pose::forward(2.0, 0.0, 0.0),
            Pose::new(1.0, 0.0, 0.0, Direction::Reverse),
            Pose::new(0.0, 0.0, 0.0, Direction::Reverse),
        ]);
        let g = initial_guess(&path, &PlannerConfig::default()).unwrap();
        let v: Vec<f64> = g.points().iter().map(|p| p.v).collect();
        assert_eq!(v, vec![0.0, 1.5, 0.0, -1.5, 0.0]);
    }

    #[test]
    fn two_poses_are_endpoints_only() {
        let path = CoarsePath::new(vec![Pose::forward(0.0, 0.0, 0.0), Pose::forward(1.0, 0.0, 0.5)]);
        let g = initial_guess(&path, &PlannerConfig::default()).unwrap();
        assert_eq!(g.len(), 2);
        assert!(g.points().iter().all(|p| p.v == 0.0));
        assert!((g.first().omega - 0.5 / g.first().t).abs() < 1e-12);
        assert_eq!(g.last().omega, 0.0);
    }

    #[test]
    fn coincident_poses_use_minimum_interval() {
        let p = Pose::forward(1.0, 1.0, 0.0);
        let g = initial_guess(&CoarsePath::new(vec![p, p]), &PlannerConfig::default()).unwrap();
        assert_eq!(g.first().t, PlannerConfig::default().t_min);
    }
}
