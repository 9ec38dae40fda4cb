use crate::error::LineSearchError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WolfeOptions {
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    pub max_evaluations: usize,
}

impl Default for WolfeOptions {
    fn default() -> Self {
        Self {
            c1: 1e-4,
            c2: 0.9,
            max_evaluations: 20,
        }
    }
}

/// Accepted step. The accepted point is always the last one evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchPoint {
    pub step: f64,
    pub value: f64,
    pub slope: f64,
    pub evaluations: usize,
    /// True when `step` is the cap and the strong Wolfe conditions may not hold there.
    pub capped: bool,
}

struct Sample {
    step: f64,
    value: f64,
    slope: f64,
}

/// Strong Wolfe line search along a direction, bracketing then zooming with cubic
/// interpolation.
///
/// `phi(α)` returns the objective value and directional derivative at step `α`, or
/// `None` to abort. `value0` and `slope0` describe `α = 0`; `max_step` is the largest
/// feasible step. A capped step is returned when the objective is still decreasing there.
pub fn wolfe_line_search(
    mut phi: impl FnMut(f64) -> Option<(f64, f64)>,
    value0: f64,
    slope0: f64,
    initial_step: f64,
    max_step: f64,
    options: &WolfeOptions,
) -> Result<LineSearchPoint, LineSearchError> {
    if !(slope0 < 0.0) {
        return Err(LineSearchError::NotDescent(slope0));
    }
    assert!(max_step > 0.0 && initial_step > 0.0);
    let mut evaluations = 0;
    let mut eval = |step: f64, evaluations: &mut usize| -> Result<Sample, LineSearchError> {
        if *evaluations >= options.max_evaluations {
            return Err(LineSearchError::EvaluationLimit(options.max_evaluations));
        }
        *evaluations += 1;
        let (value, slope) = phi(step).ok_or(LineSearchError::Aborted)?;
        Ok(Sample { step, value, slope })
    };
    let armijo = |s: &Sample| s.value <= value0 + options.c1 * s.step * slope0;
    let curvature = |s: &Sample| s.slope.abs() <= -options.c2 * slope0;
    let done = |s: Sample, evaluations: usize, capped: bool| LineSearchPoint {
        step: s.step,
        value: s.value,
        slope: s.slope,
        evaluations,
        capped,
    };

    let mut prev = Sample {
        step: 0.0,
        value: value0,
        slope: slope0,
    };
    let mut step = initial_step.min(max_step);
    let mut first = true;
    loop {
        let cur = eval(step, &mut evaluations)?;
        if !armijo(&cur) || (!first && cur.value >= prev.value) {
            return zoom(prev, cur, &mut eval, &mut evaluations, armijo, curvature)
                .map(|s| done(s, evaluations, false));
        }
        if curvature(&cur) {
            return Ok(done(cur, evaluations, false));
        }
        if cur.slope >= 0.0 {
            return zoom(cur, prev, &mut eval, &mut evaluations, armijo, curvature)
                .map(|s| done(s, evaluations, false));
        }
        if cur.step >= max_step {
            return Ok(done(cur, evaluations, true));
        }
        step = (4.0 * cur.step).min(max_step);
        prev = cur;
        first = false;
    }
}

fn zoom(
    mut lo: Sample,
    mut hi: Sample,
    eval: &mut impl FnMut(f64, &mut usize) -> Result<Sample, LineSearchError>,
    evaluations: &mut usize,
    armijo: impl Fn(&Sample) -> bool,
    curvature: impl Fn(&Sample) -> bool,
) -> Result<Sample, LineSearchError> {
    loop {
        let width = hi.step - lo.step;
        if width.abs() <= f64::EPSILON * lo.step.abs().max(hi.step.abs()) {
            return Err(LineSearchError::Collapsed);
        }
        let (a, b) = if lo.step < hi.step {
            (lo.step, hi.step)
        } else {
            (hi.step, lo.step)
        };
        let margin = 0.1 * (b - a);
        let step = match cubic_minimizer(&lo, &hi) {
            Some(t) if t >= a + margin && t <= b - margin => t,
            _ => 0.5 * (lo.step + hi.step),
        };
        let cur = eval(step, evaluations)?;
        if !armijo(&cur) || cur.value >= lo.value {
            hi = cur;
        } else {
            if curvature(&cur) {
                return Ok(cur);
            }
            if cur.slope * (hi.step - lo.step) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
    }
}

/// Minimizer of the cubic interpolating values and slopes at both samples.
fn cubic_minimizer(p: &Sample, q: &Sample) -> Option<f64> {
    let d1 = p.slope + q.slope - 3.0 * (p.value - q.value) / (p.step - q.step);
    let disc = d1 * d1 - p.slope * q.slope;
    if !(disc >= 0.0) {
        return None;
    }
    let d2 = (q.step - p.step).signum() * disc.sqrt();
    let t = q.step - (q.step - p.step) * (q.slope + d2 - d1) / (q.slope - p.slope + 2.0 * d2);
    t.is_finite().then_some(t)
}
