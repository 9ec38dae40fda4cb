//! Poses and coarse front-end paths.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

/// Wraps an angle into `(-π, π]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut a = theta.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    a
}

/// Smallest signed rotation taking `from` onto `to`, in `(-π, π]`.
pub fn angle_diff(to: f64, from: f64) -> f64 {
    normalize_angle(to - from)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Reverse,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Reverse => -1.0,
        }
    }
}

/// Planar pose; `direction` is the gear used to arrive at it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub direction: Direction,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64, direction: Direction) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
            direction,
        }
    }

    pub fn forward(x: f64, y: f64, theta: f64) -> Self {
        Self::new(x, y, theta, Direction::Forward)
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn distance(&self, other: &Pose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Center of the front disc, `offset` meters ahead along the heading.
    pub fn front(&self, offset: f64) -> [f64; 2] {
        [
            self.x + offset * self.theta.cos(),
            self.y + offset * self.theta.sin(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarsePath {
    poses: Vec<Pose>,
    /// Cumulative arc length; reverse segments count negatively.
    arc_length: Vec<f64>,
}

impl CoarsePath {
    pub fn new(poses: Vec<Pose>) -> Self {
        let mut arc_length = Vec::with_capacity(poses.len());
        let mut s = 0.0;
        for (k, pose) in poses.iter().enumerate() {
            if k > 0 {
                s += pose.direction.sign() * pose.distance(&poses[k - 1]);
            }
            arc_length.push(s);
        }
        Self { poses, arc_length }
    }

    pub fn poses(&self) -> &[Pose] {
        &self.poses
    }

    pub fn arc_length(&self) -> &[f64] {
        &self.arc_length
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn first(&self) -> Option<&Pose> {
        self.poses.first()
    }

    pub fn last(&self) -> Option<&Pose> {
        self.poses.last()
    }

    /// Unsigned length of the polyline.
    pub fn length(&self) -> f64 {
        self.poses.windows(2).map(|w| w[0].distance(&w[1])).sum()
    }

    /// True when the motion leaving pose `k` uses a different gear than the motion reaching it.
    pub fn is_gear_switch(&self, k: usize) -> bool {
        k > 0
            && k + 1 < self.poses.len()
            && self.poses[k].direction != self.poses[k + 1].direction
    }

    pub fn gear_switches(&self) -> Vec<usize> {
        (0..self.poses.len())
            .filter(|&k| self.is_gear_switch(k))
            .collect()
    }

    /// Re-samples at roughly uniform arc-length `spacing` along the polyline.
    ///
    /// Endpoints and gear-switch poses are kept verbatim; between them each run is split
    /// into `ceil(length / spacing)` equal pieces.
    pub fn resample(&self, spacing: f64) -> CoarsePath {
        assert!(spacing > 0.0, "resample spacing must be positive");
        if self.poses.len() < 2 {
            return self.clone();
        }
        let last = self.poses.len() - 1;
        let mut anchors = vec![0];
        anchors.extend(self.gear_switches());
        anchors.push(last);

        let mut out = vec![self.poses[0]];
        for run in anchors.windows(2) {
            let (a, b) = (run[0], run[1]);
            let seg = &self.poses[a..=b];
            let lengths: Vec<f64> = seg.windows(2).map(|w| w[0].distance(&w[1])).collect();
            let total: f64 = lengths.iter().sum();
            let pieces = ((total / spacing) - 1e-9).ceil().max(1.0) as usize;
            let gear = seg[1].direction;

            let mut edge = 0;
            let mut edge_start = 0.0;
            for piece in 1..pieces {
                let target = total * piece as f64 / pieces as f64;
                while edge + 1 < lengths.len() && edge_start + lengths[edge] < target {
                    edge_start += lengths[edge];
                    edge += 1;
                }
                let f = if lengths[edge] > 0.0 {
                    ((target - edge_start) / lengths[edge]).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let (p, q) = (&seg[edge], &seg[edge + 1]);
                out.push(Pose::new(
                    p.x + f * (q.x - p.x),
                    p.y + f * (q.y - p.y),
                    p.theta + f * angle_diff(q.theta, p.theta),
                    gear,
                ));
            }
            out.push(self.poses[b]);
        }
        CoarsePath::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn straight(len: f64, step: f64) -> CoarsePath {
        let n = (len / step).round() as usize;
        CoarsePath::new(
            (0..=n)
                .map(|k| Pose::forward(k as f64 * step, 0.0, 0.0))
                .collect(),
        )
    }

    #[test]
    fn normalize_range() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert_relative_eq!(normalize_angle(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-12);
        assert_relative_eq!(normalize_angle(-7.0), -7.0 + TAU, epsilon = 1e-12);
        assert_relative_eq!(angle_diff(-3.0, 3.0), TAU - 6.0, epsilon = 1e-12);
    }

    #[test]
    fn arc_length_is_signed() {
        let p = CoarsePath::new(vec![
            Pose::forward(0.0, 0.0, 0.0),
            Pose::forward(1.0, 0.0, 0.0),
            Pose::new(0.5, 0.0, 0.0, Direction::Reverse),
        ]);
        assert_eq!(p.arc_length(), &[0.0, 1.0, 0.5]);
        assert_eq!(p.length(), 1.5);
        assert_eq!(p.gear_switches(), vec![1]);
    }

    #[test]
    fn resample_straight_eight_meters() {
        let out = straight(8.0, 0.25).resample(1.0);
        assert_eq!(out.len(), 9);
        for (k, pose) in out.poses().iter().enumerate() {
            assert_relative_eq!(pose.x, k as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn resample_keeps_gear_switch_verbatim() {
        let switch = Pose::forward(3.0, 0.2, 0.1);
        let mut poses: Vec<Pose> = (0..3).map(|k| Pose::forward(k as f64, 0.0, 0.0)).collect();
        poses.push(switch);
        poses.extend((1..4).map(|k| Pose::new(3.0 - 0.7 * k as f64, 0.2, 0.1, Direction::Reverse)));
        let out = CoarsePath::new(poses).resample(0.4);
        assert!(out.poses().contains(&switch));
        let k = out.poses().iter().position(|p| *p == switch).unwrap();
        assert!(out.is_gear_switch(k));
    }

    #[test]
    fn resample_large_spacing_keeps_endpoints_and_switches() {
        let p = CoarsePath::new(vec![
            Pose::forward(0.0, 0.0, 0.0),
            Pose::forward(1.0, 0.0, 0.0),
            Pose::forward(2.0, 0.0, 0.0),
            Pose::new(1.0, 0.0, 0.0, Direction::Reverse),
        ]);
        let out = p.resample(100.0);
        assert_eq!(out.poses(), &[p.poses()[0], p.poses()[2], p.poses()[3]]);
    }

    proptest! {
        #[test]
        fn resampled_spacing_is_bounded(len in 0.5f64..20.0, spacing in 0.2f64..3.0) {
            let p = CoarsePath::new(vec![
                Pose::forward(0.0, 0.0, 0.0),
                Pose::forward(len * 0.3, len * 0.1, 0.3),
                Pose::forward(len, 0.0, 0.0),
            ]);
            let out = p.resample(spacing);
            prop_assert_eq!(out.first(), p.first());
            prop_assert_eq!(out.last(), p.last());
            for w in out.poses().windows(2) {
                prop_assert!(w[0].distance(&w[1]) <= spacing + 1e-9);
            }
        }
    }
}
