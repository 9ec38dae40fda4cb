use nalgebra::{DMatrix, DVector};

use super::cauchy::CauchyPoint;
use super::compact::LbfgsHistory;

/// Minimizes the quadratic model over the free variables with the active ones held at
/// their Cauchy values, then truncates the step back into the box.
///
/// Falls back to the Cauchy point when the reduced system is singular.
pub fn subspace_minimize(
    x: &[f64],
    g: &[f64],
    cauchy: &CauchyPoint,
    model: &LbfgsHistory,
    lower: &[f64],
    upper: &[f64],
) -> Vec<f64> {
    let free: Vec<usize> = (0..x.len()).filter(|&i| !cauchy.active[i]).collect();
    if free.is_empty() {
        return cauchy.x.clone();
    }
    let theta = model.theta();

    // Reduced gradient r = Zᵀ(g + θ(x_c − x) − W M c).
    let mut full: Vec<f64> = (0..x.len())
        .map(|i| g[i] + theta * (cauchy.x[i] - x[i]))
        .collect();
    if !model.is_empty() {
        let mc = model.middle() * &cauchy.c;
        model.add_w_times(&mc, -1.0, &mut full);
    }
    let r: Vec<f64> = free.iter().map(|&i| full[i]).collect();

    // d_u = −(1/θ) r − (1/θ²) ZᵀW (I − (1/θ) M WᵀZZᵀW)⁻¹ M WᵀZ r
    let mut du: Vec<f64> = r.iter().map(|v| -v / theta).collect();
    if !model.is_empty() {
        let width = model.width();
        let rows: Vec<DVector<f64>> = free.iter().map(|&i| model.w_row(i)).collect();
        let mut wzr = DVector::zeros(width);
        let mut wzzw = DMatrix::zeros(width, width);
        for (row, ri) in rows.iter().zip(&r) {
            wzr.axpy(*ri, row, 1.0);
            wzzw.ger(1.0, row, row, 1.0);
        }
        let v = model.middle() * wzr;
        let n = DMatrix::identity(width, width) - model.middle() * wzzw / theta;
        let Some(v) = n.lu().solve(&v) else {
            return cauchy.x.clone();
        };
        if v.iter().any(|e| !e.is_finite()) {
            return cauchy.x.clone();
        }
        for (d, row) in du.iter_mut().zip(&rows) {
            *d -= row.dot(&v) / (theta * theta);
        }
    }

    // Largest α ≤ 1 keeping x_c + α d_u in the box.
    let mut alpha: f64 = 1.0;
    for (&i, &d) in free.iter().zip(&du) {
        if d > 0.0 {
            alpha = alpha.min((upper[i] - cauchy.x[i]) / d);
        } else if d < 0.0 {
            alpha = alpha.min((lower[i] - cauchy.x[i]) / d);
        }
    }
    let alpha = alpha.max(0.0);
    let mut out = cauchy.x.clone();
    for (&i, &d) in free.iter().zip(&du) {
        out[i] = (cauchy.x[i] + alpha * d).clamp(lower[i], upper[i]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lbfgsb::cauchy::generalized_cauchy_point;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn all_active_returns_cauchy_point() {
        let h = LbfgsHistory::new(3);
        let x = [0.5, 0.5];
        let g = [10.0, -10.0];
        let (lo, hi) = ([0.0, 0.0], [1.0, 1.0]);
        let cp = generalized_cauchy_point(&x, &g, &h, &lo, &hi);
        assert_eq!(cp.active_indices(), vec![0, 1]);
        assert_eq!(subspace_minimize(&x, &g, &cp, &h, &lo, &hi), cp.x);
    }

    #[test]
    fn identity_model_is_clipped_gradient_step() {
        let h = LbfgsHistory::new(3);
        let x = [0.0, 0.0];
        let g = [0.5, -0.25];
        let (lo, hi) = ([-INF, -INF], [INF, INF]);
        let cp = generalized_cauchy_point(&x, &g, &h, &lo, &hi);
        assert_eq!(subspace_minimize(&x, &g, &cp, &h, &lo, &hi), vec![-0.5, 0.25]);
    }

    #[test]
    fn free_variable_reaches_conditional_minimum() {
        // Model B = [[2, 1], [1, 2]], rebuilt exactly from two B-conjugate pairs. x = 0,
        // g = (3, 1). Variable 0 is pinned at its lower bound −0.2 by the Cauchy search.
        let b = [[2.0, 1.0], [1.0, 2.0]];
        let mut h = LbfgsHistory::new(4);
        for s in [[1.0, 0.0], [-1.0, 2.0]] {
            let y = vec![b[0][0] * s[0] + b[0][1] * s[1], b[1][0] * s[0] + b[1][1] * s[1]];
            assert!(h.push(s.to_vec(), y));
        }
        let dense = h.dense(2);
        for i in 0..2 {
            for j in 0..2 {
                assert!((dense[(i, j)] - b[i][j]).abs() < 1e-12);
            }
        }
        let x = [0.0, 0.0];
        let g = [3.0, 1.0];
        let (lo, hi) = ([-0.2, -10.0], [10.0, 10.0]);
        let cp = generalized_cauchy_point(&x, &g, &h, &lo, &hi);
        assert_eq!(cp.active_indices(), vec![0]);
        let xb = subspace_minimize(&x, &g, &cp, &h, &lo, &hi);
        // d/dx1 [g·x + ½xᵀBx] at x0 = −0.2: 1 + x0 + 2 x1 = 0.
        assert_eq!(xb[0], -0.2);
        assert!((xb[1] - (-0.4)).abs() < 1e-12, "{xb:?}");
    }

    #[test]
    fn step_is_truncated_to_box() {
        let h = LbfgsHistory::new(3);
        let x = [0.0, 0.0];
        let g = [-4.0, -1.0];
        let (lo, hi) = ([-1.0, -1.0], [2.0, 0.5]);
        let cp = generalized_cauchy_point(&x, &g, &h, &lo, &hi);
        let xb = subspace_minimize(&x, &g, &cp, &h, &lo, &hi);
        for i in 0..2 {
            assert!(xb[i] >= lo[i] && xb[i] <= hi[i]);
        }
    }
}
