//! Closed-form derivatives of the per-task utility.
//!
//! With `S = x + X + barrier` and `B = X + barrier` (X = others' total):
//!
//! ```text
//! du/dx     =  B / S^2 * e + eps - kappa
//! d2u/dx2   = -e * (2B / S^3 + B^2 / (rho S^4))
//! d2u/dX2   =  e * (2 rho x S - x^2) / (rho S^4)
//! ```
//!
//! with `e = exp(-x / (rho S))`. As the barrier goes to zero these reduce to
//! the textbook expressions in `x` and `X` alone.

use super::{ActionProfile, GameSpec, TaskParams};
use crate::error::{Error, Result};

#[inline]
fn decay(x: f64, column: f64, rho: f64) -> f64 {
    (-x / (rho * column)).exp()
}

/// Derivative of the task utility in the node's own request.
#[inline]
pub fn task_gradient(x: f64, others: f64, p: TaskParams, barrier: f64) -> f64 {
    let b = others + barrier;
    let s = x + b;
    b / (s * s) * decay(x, s, p.rho) + p.eps - p.kappa
}

/// Second derivative in the node's own request; never positive.
#[inline]
pub fn task_hessian_own(x: f64, others: f64, p: TaskParams, barrier: f64) -> f64 {
    let b = others + barrier;
    let s = x + b;
    let s3 = s * s * s;
    -decay(x, s, p.rho) * (2.0 * b / s3 + b * b / (p.rho * s3 * s))
}

/// Second derivative in the others' total request; non-negative when rho > 0.5.
#[inline]
pub fn task_hessian_others(x: f64, others: f64, p: TaskParams, barrier: f64) -> f64 {
    let s = x + others + barrier;
    let s4 = (s * s) * (s * s);
    decay(x, s, p.rho) * (2.0 * p.rho * x * s - x * x) / (p.rho * s4)
}

/// Gradient of node `k`'s total utility in its own request row.
pub fn utility_gradient(node: usize, x: &ActionProfile, spec: &GameSpec) -> Result<Vec<f64>> {
    spec.check_node(node)?;
    x.matrix().ensure_shape(spec.nodes, spec.tasks)?;
    Ok((0..spec.tasks)
        .map(|m| {
            task_gradient(
                x.get(node, m),
                x.others_sum(node, m),
                spec.params(node, m),
                spec.barrier,
            )
        })
        .collect())
}

pub fn hessian_own(node: usize, task: usize, x: &ActionProfile, spec: &GameSpec) -> Result<f64> {
    check_cell(node, task, spec)?;
    Ok(task_hessian_own(
        x.get(node, task),
        x.others_sum(node, task),
        spec.params(node, task),
        spec.barrier,
    ))
}

pub fn hessian_others(node: usize, task: usize, x: &ActionProfile, spec: &GameSpec) -> Result<f64> {
    check_cell(node, task, spec)?;
    Ok(task_hessian_others(
        x.get(node, task),
        x.others_sum(node, task),
        spec.params(node, task),
        spec.barrier,
    ))
}

fn check_cell(node: usize, task: usize, spec: &GameSpec) -> Result<()> {
    spec.check_node(node)?;
    if task >= spec.tasks {
        return Err(Error::Index {
            index: task,
            len: spec.tasks,
        });
    }
    Ok(())
}

/// `(X1 - X0) . (g(X1) - g(X0))` for the all-ones weighted pseudo-gradient `g`.
///
/// Strictly negative values for every distinct pair certify diagonal strict
/// concavity, hence a unique equilibrium.
pub fn dsc_gap(x0: &ActionProfile, x1: &ActionProfile, spec: &GameSpec) -> Result<f64> {
    x0.matrix().ensure_shape(spec.nodes, spec.tasks)?;
    x1.matrix().ensure_shape(spec.nodes, spec.tasks)?;
    if x0 == x1 {
        return Err(Error::Degenerate("dsc_gap needs two distinct profiles".into()));
    }
    let mut total = 0.0;
    for k in 0..spec.nodes {
        let g0 = utility_gradient(k, x0, spec)?;
        let g1 = utility_gradient(k, x1, spec)?;
        for m in 0..spec.tasks {
            total += (x1.get(k, m) - x0.get(k, m)) * (g1[m] - g0[m]);
        }
    }
    Ok(total)
}
