use nalgebra::DVector;

use super::compact::LbfgsHistory;

/// Generalized Cauchy point and the data subspace minimization needs.
#[derive(Debug, Clone)]
pub struct CauchyPoint {
    pub x: Vec<f64>,
    /// `active[i]` when variable `i` sits at a bound at the Cauchy point.
    pub active: Vec<bool>,
    /// `c = Wᵀ(x_c − x)`.
    pub c: DVector<f64>,
}

impl CauchyPoint {
    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.active.len()).filter(|&i| self.active[i]).collect()
    }
}

/// First local minimizer of the quadratic model along the projected steepest-descent path.
///
/// Breakpoints are visited by increasing step, ties by increasing variable index.
pub fn generalized_cauchy_point(
    x: &[f64],
    g: &[f64],
    model: &LbfgsHistory,
    lower: &[f64],
    upper: &[f64],
) -> CauchyPoint {
    let n = x.len();
    let theta = model.theta();
    let mut xc = x.to_vec();
    let mut active = vec![false; n];
    let mut d = vec![0.0; n];
    let mut breaks: Vec<(f64, usize)> = Vec::new();

    for i in 0..n {
        let t = if g[i] < 0.0 {
            (x[i] - upper[i]) / g[i]
        } else if g[i] > 0.0 {
            (x[i] - lower[i]) / g[i]
        } else {
            f64::INFINITY
        };
        if lower[i] == upper[i] || t == 0.0 {
            active[i] = true;
            continue;
        }
        d[i] = -g[i];
        if t.is_finite() {
            breaks.push((t, i));
        }
    }
    breaks.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut p = model.wt_times(&d);
    let mut c = DVector::zeros(model.width());
    let mut f1: f64 = -d.iter().map(|v| v * v).sum::<f64>();
    let mp = model.middle() * &p;
    let mut f2 = -theta * f1 - p.dot(&mp);
    let f2_floor = f64::EPSILON * f2.abs();
    f2 = f2.max(f2_floor);
    let mut dt_min = if f2 > 0.0 { -f1 / f2 } else { 0.0 };
    let mut t_old = 0.0;

    for &(t, b) in &breaks {
        if f1 >= 0.0 {
            dt_min = 0.0;
            break;
        }
        let dt = t - t_old;
        if dt_min < dt {
            break;
        }
        let gb = g[b];
        xc[b] = if d[b] > 0.0 { upper[b] } else { lower[b] };
        let zb = xc[b] - x[b];
        c += dt * &p;
        active[b] = true;
        d[b] = 0.0;
        if model.is_empty() {
            f1 += dt * f2 + gb * gb + theta * gb * zb;
            f2 -= theta * gb * gb;
        } else {
            let wb = model.w_row(b);
            let mwb = model.middle() * &wb;
            f1 += dt * f2 + gb * gb + theta * gb * zb - gb * mwb.dot(&c);
            f2 -= theta * gb * gb + 2.0 * gb * mwb.dot(&p) + gb * gb * mwb.dot(&wb);
            p += gb * wb;
        }
        f2 = f2.max(f2_floor);
        dt_min = if f2 > 0.0 { -f1 / f2 } else { 0.0 };
        t_old = t;
    }
    let dt_min = dt_min.max(0.0);
    let t_final = t_old + dt_min;
    for i in 0..n {
        if d[i] != 0.0 {
            xc[i] = (x[i] + t_final * d[i]).clamp(lower[i], upper[i]);
        }
    }
    c += dt_min * &p;
    CauchyPoint { x: xc, active, c }
}
