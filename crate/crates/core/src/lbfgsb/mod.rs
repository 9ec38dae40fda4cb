//! Limited-memory BFGS with simple bounds.
//!
//! Each iteration finds the generalized Cauchy point of the limited-memory quadratic
//! model, minimizes the model over the variables left free there, and runs a strong Wolfe
//! line search toward the result. Every evaluated point lies inside the box.

mod cauchy;
mod compact;
mod line_search;
mod subspace;

use std::collections::VecDeque;
use std::time::Instant;

pub use cauchy::{generalized_cauchy_point, CauchyPoint};
pub use compact::{LbfgsHistory, CURVATURE_THRESHOLD};
pub use line_search::{wolfe_line_search, LineSearchPoint, WolfeOptions};
pub use subspace::subspace_minimize;

use crate::error::SolverError;

/// Objective `h(x)` writing its gradient into the second argument.
pub trait Objective {
    fn evaluate(&mut self, x: &[f64], grad: &mut [f64]) -> f64;
}

impl<F: FnMut(&[f64], &mut [f64]) -> f64> Objective for F {
    fn evaluate(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        self(x, grad)
    }
}

/// Box-constrained problem `min h(x)` subject to `lower <= x <= upper`.
#[derive(Debug, Clone)]
pub struct BoxProblem<F> {
    lower: Vec<f64>,
    upper: Vec<f64>,
    objective: F,
}

impl<F: Objective> BoxProblem<F> {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, objective: F) -> Result<Self, SolverError> {
        if lower.len() != upper.len() {
            return Err(SolverError::Dimension {
                x0: lower.len(),
                bounds: upper.len(),
            });
        }
        if let Some(i) = (0..lower.len()).find(|&i| !(lower[i] <= upper[i])) {
            return Err(SolverError::InvertedBounds(i));
        }
        Ok(Self {
            lower,
            upper,
            objective,
        })
    }

    /// Problem without bounds.
    pub fn unbounded(dimension: usize, objective: F) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; dimension],
            upper: vec![f64::INFINITY; dimension],
            objective,
        }
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn objective_mut(&mut self) -> &mut F {
        &mut self.objective
    }

    pub fn into_objective(self) -> F {
        self.objective
    }

    fn clamp(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeOptions {
    /// Stored correction pairs.
    pub history: usize,
    /// Stop when the projected gradient ∞-norm is at most `gtol · max(1, ‖x‖∞)`.
    pub gtol: f64,
    /// Stop when an accepted step changes the objective by less than this.
    pub ftol_abs: f64,
    /// Stop when the mean decrease over the last `ftol_window` iterations is at most
    /// `ftol_rel · max(|f|, 1)`; zero disables the test.
    pub ftol_rel: f64,
    pub ftol_window: usize,
    pub max_iterations: usize,
    pub line_search: WolfeOptions,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            history: 8,
            gtol: 1e-5,
            ftol_abs: 1e-12,
            ftol_rel: 0.0,
            ftol_window: 1,
            max_iterations: 1000,
            line_search: WolfeOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Projected gradient below tolerance.
    Converged,
    /// Objective change fell below the absolute or relative floor.
    Stalled,
    MaxIterations,
    LineSearchFailure,
}

impl Termination {
    pub fn is_converged(self) -> bool {
        matches!(self, Termination::Converged | Termination::Stalled)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub projected_gradient_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
    pub elapsed_ms: f64,
}

/// Accepted iterate handed to an observer.
#[derive(Debug, Clone, Copy)]
pub struct Iterate<'a> {
    pub iteration: usize,
    pub x: &'a [f64],
    pub value: f64,
    pub gradient: &'a [f64],
}

/// ∞-norm of the gradient projected onto the box.
pub fn projected_gradient_norm(x: &[f64], g: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    let mut norm: f64 = 0.0;
    for i in 0..x.len() {
        let pg = if g[i] < 0.0 {
            (x[i] - upper[i]).max(g[i])
        } else {
            (x[i] - lower[i]).min(g[i])
        };
        norm = norm.max(pg.abs());
    }
    norm
}

pub fn minimize<F: Objective>(
    problem: &mut BoxProblem<F>,
    x0: &[f64],
    options: &MinimizeOptions,
) -> Result<SolverResult, SolverError> {
    minimize_observed(problem, x0, options, |_| {})
}

/// [`minimize`], calling `observer` with the start point and every accepted iterate.
pub fn minimize_observed<F: Objective>(
    problem: &mut BoxProblem<F>,
    x0: &[f64],
    options: &MinimizeOptions,
    mut observer: impl FnMut(&Iterate),
) -> Result<SolverResult, SolverError> {
    let started = Instant::now();
    let n = problem.dimension();
    if x0.len() != n {
        return Err(SolverError::Dimension {
            x0: x0.len(),
            bounds: n,
        });
    }
    if let Some(i) = x0.iter().position(|v| !v.is_finite()) {
        return Err(SolverError::NonFiniteStart(i));
    }
    let mut x = x0.to_vec();
    problem.clamp(&mut x);

    let mut evaluations = 0;
    let mut g = vec![0.0; n];
    let mut f = checked_eval(problem, &x, &mut g, &mut evaluations)?;
    observer(&Iterate {
        iteration: 0,
        x: &x,
        value: f,
        gradient: &g,
    });

    let mut history = LbfgsHistory::new(options.history);
    let mut iterations = 0;
    let mut recovering = false;
    // Objective values of the last `ftol_window` iterations and the one before them.
    let window = options.ftol_window.max(1);
    let mut recent = VecDeque::from([f]);
    let mut trial_x = vec![0.0; n];
    let mut trial_g = vec![0.0; n];

    let termination = loop {
        let pg = projected_gradient_norm(&x, &g, &problem.lower, &problem.upper);
        let xnorm = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if pg <= options.gtol * xnorm.max(1.0) {
            break Termination::Converged;
        }
        if iterations >= options.max_iterations {
            break Termination::MaxIterations;
        }

        let cauchy = generalized_cauchy_point(&x, &g, &history, &problem.lower, &problem.upper);
        let xbar = subspace_minimize(&x, &g, &cauchy, &history, &problem.lower, &problem.upper);
        let d: Vec<f64> = xbar.iter().zip(&x).map(|(a, b)| a - b).collect();
        let slope0: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();

        let mut max_step = f64::INFINITY;
        for i in 0..n {
            if d[i] > 0.0 {
                max_step = max_step.min((problem.upper[i] - x[i]) / d[i]);
            } else if d[i] < 0.0 {
                max_step = max_step.min((problem.lower[i] - x[i]) / d[i]);
            }
        }
        let max_step = max_step.min(1e10);
        let dnorm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        let initial = if history.is_empty() { 1.0 / dnorm } else { 1.0 };
        let initial = initial.min(max_step);

        let mut eval_error = None;
        let search = if slope0 < 0.0 && max_step > 0.0 {
            wolfe_line_search(
                |step| {
                    for i in 0..n {
                        trial_x[i] = (x[i] + step * d[i]).clamp(problem.lower[i], problem.upper[i]);
                    }
                    match checked_eval(problem, &trial_x, &mut trial_g, &mut evaluations) {
                        Ok(v) => Some((v, trial_g.iter().zip(&d).map(|(a, b)| a * b).sum())),
                        Err(e) => {
                            eval_error = Some(e);
                            None
                        }
                    }
                },
                f,
                slope0,
                initial,
                max_step,
                &options.line_search,
            )
        } else {
            Err(crate::error::LineSearchError::NotDescent(slope0))
        };
        if let Some(e) = eval_error {
            return Err(e);
        }
        let accepted = match search {
            Ok(p) if p.value < f => p,
            _ => {
                if recovering || history.is_empty() {
                    break Termination::LineSearchFailure;
                }
                history.clear();
                recovering = true;
                continue;
            }
        };
        recovering = false;
        iterations += 1;

        let s: Vec<f64> = trial_x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = trial_g.iter().zip(&g).map(|(a, b)| a - b).collect();
        history.push(s, y);
        let change = f - accepted.value;
        std::mem::swap(&mut x, &mut trial_x);
        std::mem::swap(&mut g, &mut trial_g);
        f = accepted.value;
        observer(&Iterate {
            iteration: iterations,
            x: &x,
            value: f,
            gradient: &g,
        });
        recent.push_back(f);
        if recent.len() > window + 1 {
            recent.pop_front();
        }
        if change.abs() < options.ftol_abs {
            break Termination::Stalled;
        }
        if recent.len() == window + 1 {
            let mean = (recent[0] - f) / window as f64;
            if mean <= options.ftol_rel * f.abs().max(1.0) {
                break Termination::Stalled;
            }
        }
    };

    Ok(SolverResult {
        projected_gradient_norm: projected_gradient_norm(&x, &g, &problem.lower, &problem.upper),
        x,
        value: f,
        gradient: g,
        iterations,
        evaluations,
        termination,
        elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

fn checked_eval<F: Objective>(
    problem: &mut BoxProblem<F>,
    x: &[f64],
    g: &mut [f64],
    evaluations: &mut usize,
) -> Result<f64, SolverError> {
    *evaluations += 1;
    let value = problem.objective.evaluate(x, g);
    if !value.is_finite() {
        return Err(SolverError::NonFiniteValue {
            evaluation: *evaluations,
        });
    }
    if let Some(index) = g.iter().position(|v| !v.is_finite()) {
        return Err(SolverError::NonFiniteGradient {
            evaluation: *evaluations,
            index,
        });
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64], g: &mut [f64]) -> f64 {
        let (a, b) = (x[0], x[1]);
        g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
        g[1] = 200.0 * (b - a * a);
        (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
    }

    #[test]
    fn bound_active_minimum_is_exact() {
        let mut p = BoxProblem::new(vec![0.0], vec![2.0], |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * (x[0] - 3.0);
            (x[0] - 3.0).powi(2)
        })
        .unwrap();
        let r = minimize(&mut p, &[0.0], &MinimizeOptions::default()).unwrap();
        assert_eq!(r.x, vec![2.0]);
        assert_eq!(r.termination, Termination::Converged);
    }

    #[test]
    fn rosenbrock_in_box() {
        let mut p = BoxProblem::new(vec![-2.0; 2], vec![2.0; 2], rosenbrock).unwrap();
        let opts = MinimizeOptions {
            gtol: 1e-10,
            ftol_abs: 0.0,
            ..Default::default()
        };
        let r = minimize(&mut p, &[-1.2, 1.0], &opts).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{:?}", r);
        assert!(r.termination.is_converged());
    }

    #[test]
    fn diagonal_quadratic_within_dimension_plus_history() {
        let diag = [1.0, 3.0, 10.0, 0.5, 7.0];
        let mut p = BoxProblem::new(vec![-5.0; 5], vec![5.0; 5], |x: &[f64], g: &mut [f64]| {
            let mut f = 0.0;
            for i in 0..5 {
                g[i] = 2.0 * diag[i] * x[i];
                f += diag[i] * x[i] * x[i];
            }
            f
        })
        .unwrap();
        // Finite termination needs near-exact line searches.
        let opts = MinimizeOptions {
            gtol: 1e-9,
            line_search: WolfeOptions {
                c2: 1e-3,
                ..Default::default()
            },
            ..Default::default()
        };
        let r = minimize(&mut p, &[1.0, -2.0, 0.5, 3.0, -1.5], &opts).unwrap();
        assert!(r.iterations <= 5 + opts.history, "{} iterations", r.iterations);
        assert!(r.x.iter().all(|v| v.abs() < 1e-8), "{:?}", r.x);
    }

    #[test]
    fn start_is_clamped() {
        let mut p = BoxProblem::new(vec![0.0], vec![1.0], |x: &[f64], g: &mut [f64]| {
            assert!((0.0..=1.0).contains(&x[0]));
            g[0] = 2.0 * x[0];
            x[0] * x[0]
        })
        .unwrap();
        let r = minimize(&mut p, &[7.0], &MinimizeOptions::default()).unwrap();
        assert_eq!(r.x, vec![0.0]);
    }

    #[test]
    fn non_finite_value_aborts() {
        let mut p = BoxProblem::unbounded(1, |x: &[f64], g: &mut [f64]| {
            g[0] = -1.0;
            if x[0] > 0.5 {
                f64::NAN
            } else {
                -x[0]
            }
        });
        let err = minimize(&mut p, &[0.0], &MinimizeOptions::default()).unwrap_err();
        assert!(matches!(err, SolverError::NonFiniteValue { .. }));
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let f = |_: &[f64], _: &mut [f64]| 0.0;
        assert_eq!(
            BoxProblem::new(vec![1.0], vec![0.0], f).err(),
            Some(SolverError::InvertedBounds(0))
        );
        let mut p = BoxProblem::unbounded(2, f);
        assert_eq!(
            minimize(&mut p, &[0.0], &MinimizeOptions::default()).unwrap_err(),
            SolverError::Dimension { x0: 1, bounds: 2 }
        );
        assert_eq!(
            minimize(&mut p, &[0.0, f64::NAN], &MinimizeOptions::default()).unwrap_err(),
            SolverError::NonFiniteStart(1)
        );
    }

    #[test]
    fn projected_gradient_respects_bounds() {
        let pg = projected_gradient_norm(&[0.0, 0.5], &[3.0, -0.1], &[0.0, 0.0], &[1.0, 1.0]);
        assert!((pg - 0.1).abs() < 1e-15);
    }
}
