use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

/// Limited-memory BFGS matrix in compact form `B = θI − W M Wᵀ`, `W = [Y, θS]`.
#[derive(Debug, Clone)]
pub struct LbfgsHistory {
    capacity: usize,
    s: VecDeque<Vec<f64>>,
    y: VecDeque<Vec<f64>>,
    theta: f64,
    /// `M`, the inverse of `[[-D, Lᵀ], [L, θSᵀS]]`.
    middle: DMatrix<f64>,
}

/// Relative curvature threshold a pair must clear to be stored.
pub const CURVATURE_THRESHOLD: f64 = 1e-10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl LbfgsHistory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "history capacity must be positive");
        Self {
            capacity,
            s: VecDeque::with_capacity(capacity),
            y: VecDeque::with_capacity(capacity),
            theta: 1.0,
            middle: DMatrix::zeros(0, 0),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Stored pair count.
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&[f64], &[f64])> {
        self.s.iter().map(Vec::as_slice).zip(self.y.iter().map(Vec::as_slice))
    }

    pub fn middle(&self) -> &DMatrix<f64> {
        &self.middle
    }

    pub fn clear(&mut self) {
        self.s.clear();
        self.y.clear();
        self.theta = 1.0;
        self.middle = DMatrix::zeros(0, 0);
    }

    /// Stores `(s, y)` when `sᵀy > threshold·‖s‖‖y‖`; returns whether it was kept.
    pub fn push(&mut self, s: Vec<f64>, y: Vec<f64>) -> bool {
        assert_eq!(s.len(), y.len());
        let sy = dot(&s, &y);
        let yy = dot(&y, &y);
        let bound = CURVATURE_THRESHOLD * dot(&s, &s).sqrt() * yy.sqrt();
        if !(sy > bound) || !(sy > 0.0) || !yy.is_finite() {
            return false;
        }
        if self.s.len() == self.capacity {
            self.s.pop_front();
            self.y.pop_front();
        }
        self.s.push_back(s);
        self.y.push_back(y);
        self.theta = yy / sy;
        while !self.rebuild() {
            // Numerically singular middle matrix: forget the oldest pair.
            self.s.pop_front();
            self.y.pop_front();
        }
        true
    }

    fn rebuild(&mut self) -> bool {
        let m = self.s.len();
        if m == 0 {
            self.middle = DMatrix::zeros(0, 0);
            return true;
        }
        let mut k = DMatrix::zeros(2 * m, 2 * m);
        for i in 0..m {
            k[(i, i)] = -dot(&self.s[i], &self.y[i]);
            for j in 0..i {
                let l = dot(&self.s[i], &self.y[j]);
                k[(m + i, j)] = l;
                k[(j, m + i)] = l;
            }
            for j in 0..=i {
                let ss = self.theta * dot(&self.s[i], &self.s[j]);
                k[(m + i, m + j)] = ss;
                k[(m + j, m + i)] = ss;
            }
        }
        match k.try_inverse() {
            Some(inv) if inv.iter().all(|v| v.is_finite()) => {
                self.middle = inv;
                true
            }
            _ => false,
        }
    }

    /// Width of `W`, i.e. twice the stored pair count.
    pub fn width(&self) -> usize {
        2 * self.s.len()
    }

    /// Row `i` of `W`.
    pub fn w_row(&self, i: usize) -> DVector<f64> {
        let m = self.s.len();
        DVector::from_fn(2 * m, |c, _| {
            if c < m {
                self.y[c][i]
            } else {
                self.theta * self.s[c - m][i]
            }
        })
    }

    /// `Wᵀ v`.
    pub fn wt_times(&self, v: &[f64]) -> DVector<f64> {
        let m = self.s.len();
        DVector::from_fn(2 * m, |c, _| {
            if c < m {
                dot(&self.y[c], v)
            } else {
                self.theta * dot(&self.s[c - m], v)
            }
        })
    }

    /// Adds `scale · W p` into `out`.
    pub fn add_w_times(&self, p: &DVector<f64>, scale: f64, out: &mut [f64]) {
        let m = self.s.len();
        for c in 0..m {
            let py = scale * p[c];
            let ps = scale * self.theta * p[m + c];
            for (o, (y, s)) in out.iter_mut().zip(self.y[c].iter().zip(&self.s[c])) {
                *o += py * y + ps * s;
            }
        }
    }

    /// `B v`.
    pub fn b_times(&self, v: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = v.iter().map(|x| self.theta * x).collect();
        if !self.is_empty() {
            let p = &self.middle * self.wt_times(v);
            self.add_w_times(&p, -1.0, &mut out);
        }
        out
    }

    /// Dense `B`, for tests and diagnostics on small problems.
    pub fn dense(&self, n: usize) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            b.set_column(j, &DVector::from_vec(self.b_times(&e)));
            e[j] = 0.0;
        }
        b
    }
}
