//! Deterministic full-batch optimisers.

use nalgebra::DVector;

use super::objective::{LinearObjective, Objective};

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Outcome {
    pub params: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
    /// Loss after each accepted step, starting with the initial loss.
    pub trace: Vec<f64>,
}

fn inf_norm(g: &[f64]) -> f64 {
    g.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Backtracking from step `t0` along `direction`. Returns the accepted
/// point, its loss and the step length.
fn armijo<O: Objective>(
    obj: &O,
    params: &[f64],
    loss: f64,
    slope: f64,
    direction: &[f64],
    t0: f64,
) -> Option<(Vec<f64>, f64, f64)> {
    let mut t = t0;
    for _ in 0..MAX_HALVINGS {
        let cand: Vec<f64> = params.iter().zip(direction).map(|(p, d)| p + t * d).collect();
        let f = obj.loss(&cand);
        if f.is_finite() && f <= loss + ARMIJO * t * slope && f < loss {
            return Some((cand, f, t));
        }
        t *= 0.5;
    }
    None
}

/// Damped Newton with Armijo backtracking for the convex linear objective.
/// The damping `mu` grows when the damped Hessian is not positive definite
/// or a step cannot be accepted, and decays after accepted steps.
pub(crate) fn newton(obj: &LinearObjective<'_>, max_iters: usize, grad_tol: f64) -> Outcome {
    let p = obj.num_params();
    let mut params = vec![0.0; p];
    let (mut loss, mut grad) = obj.loss_grad(&params);
    let mut trace = vec![loss];
    let mut mu = 1e-10;
    let mut iterations = 0;
    while iterations < max_iters && inf_norm(&grad) > grad_tol {
        iterations += 1;
        let h = obj.hessian(&params);
        let mut accepted = None;
        while mu <= 1e12 {
            let mut damped = h.clone();
            for j in 0..p {
                damped[(j, j)] += mu;
            }
            let Some(chol) = damped.cholesky() else {
                mu = (mu * 10.0).max(1e-10);
                continue;
            };
            let step = chol.solve(&DVector::from_iterator(p, grad.iter().map(|g| -g)));
            let step: Vec<f64> = step.iter().copied().collect();
            let slope = dot(&grad, &step);
            match armijo(obj, &params, loss, slope, &step, 1.0) {
                Some(found) => {
                    accepted = Some(found);
                    mu = (mu * 0.1).max(1e-12);
                    break;
                }
                None => mu = (mu * 10.0).max(1e-10),
            }
        }
        let Some((next, _, _)) = accepted else {
            break; // no descent left at working precision
        };
        params = next;
        let (l, g) = obj.loss_grad(&params);
        loss = l;
        grad = g;
        trace.push(loss);
    }
    let grad_norm = inf_norm(&grad);
    Outcome { params, iterations, grad_norm, converged: grad_norm <= grad_tol, trace }
}

/// Gradient descent with Armijo backtracking; the trial step starts at twice
/// the previously accepted one.
pub(crate) fn gradient_descent<O: Objective>(
    obj: &O,
    init: Vec<f64>,
    max_iters: usize,
    grad_tol: f64,
) -> Outcome {
    let mut params = init;
    let (mut loss, mut grad) = obj.loss_grad(&params);
    let mut trace = vec![loss];
    let mut step: f64 = 1.0;
    let mut iterations = 0;
    while iterations < max_iters && inf_norm(&grad) > grad_tol {
        iterations += 1;
        let direction: Vec<f64> = grad.iter().map(|g| -g).collect();
        let slope = -dot(&grad, &grad);
        let Some((next, _, t)) = armijo(obj, &params, loss, slope, &direction, (2.0 * step).min(1e4)) else {
            break;
        };
        step = t;
        params = next;
        let (l, g) = obj.loss_grad(&params);
        loss = l;
        grad = g;
        trace.push(loss);
    }
    let grad_norm = inf_norm(&grad);
    Outcome { params, iterations, grad_norm, converged: grad_norm <= grad_tol, trace }
}
