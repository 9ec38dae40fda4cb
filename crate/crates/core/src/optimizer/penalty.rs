/// Twice continuously differentiable one-sided penalty: zero for `x <= 0`, cubic up to the
/// knee `x_j`, quadratic beyond it.
pub fn penalty_l(x: f64, x_j: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < x_j {
        x * x * x
    } else {
        3.0 * x_j * x * x - 3.0 * x_j * x_j * x + x_j * x_j * x_j
    }
}

/// Derivative of [`penalty_l`].
pub fn penalty_l_grad(x: f64, x_j: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < x_j {
        3.0 * x * x
    } else {
        6.0 * x_j * x - 3.0 * x_j * x_j
    }
}
