use serde::{Deserialize, Serialize};

use super::hungarian::{hungarian_match, Assignment};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// `theta + sqrt((xi + 1) ln t / counts)` entrywise.
pub fn ucb_weights(theta: &Matrix, counts: &Matrix, xi: usize, t: f64) -> Result<Matrix> {
    counts.ensure_shape(theta.rows(), theta.cols())?;
    if counts.iter().any(|&c| c < 1.0) {
        return Err(Error::Protocol("confidence weights requested before warm-up finished".into()));
    }
    let scale = (xi as f64 + 1.0) * t.ln().max(0.0);
    Ok(Matrix::from_fn(theta.rows(), theta.cols(), |k, m| {
        theta.get(k, m) + (scale / counts.get(k, m)).sqrt()
    }))
}

/// Centralised combinatorial UCB: every round each node takes at most one
/// task, chosen by maximum-weight matching on optimistic utility estimates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LlrState {
    pub theta_hat: Matrix,
    pub counts: Matrix,
    pub xi: usize,
    pub t: u64,
    pub warmup_len: u64,
    pub last: Option<Assignment>,
}

impl LlrState {
    pub fn new(nodes: usize, tasks: usize) -> Result<Self> {
        if nodes == 0 || tasks == 0 {
            return Err(Error::Config("LLR needs at least one node and one task".into()));
        }
        Ok(LlrState {
            theta_hat: Matrix::zeros(nodes, tasks),
            counts: Matrix::zeros(nodes, tasks),
            xi: nodes.min(tasks),
            t: 1,
            warmup_len: nodes.max(tasks) as u64,
            last: None,
        })
    }

    pub fn nodes(&self) -> usize {
        self.theta_hat.rows()
    }

    pub fn tasks(&self) -> usize {
        self.theta_hat.cols()
    }

    /// Covering schedule: with `K <= M` node `k` plays task `(k + t) mod M`;
    /// otherwise task `m` goes to node `(m + t) mod K` and the rest idle.
    pub fn warmup_assignment(&self, round: u64) -> Assignment {
        let (k_n, m_n) = (self.nodes(), self.tasks());
        let s = round as usize;
        if k_n <= m_n {
            (0..k_n).map(|k| Some((k + s) % m_n)).collect()
        } else {
            let mut a = vec![None; k_n];
            for m in 0..m_n {
                a[(m + s) % k_n] = Some(m);
            }
            a
        }
    }

    pub fn ucb(&self) -> Result<Matrix> {
        ucb_weights(&self.theta_hat, &self.counts, self.xi, self.t as f64)
    }

    pub fn act(&mut self) -> Result<Assignment> {
        let a = if self.t <= self.warmup_len {
            self.warmup_assignment(self.t - 1)
        } else {
            hungarian_match(&self.ucb()?)
        };
        self.last = Some(a.clone());
        Ok(a)
    }

    /// `observed[k]` is node `k`'s utility on its assigned task; idle nodes
    /// are ignored.
    pub fn observe(&mut self, observed: &[f64]) -> Result<()> {
        let a = self
            .last
            .take()
            .ok_or_else(|| Error::Protocol("llr observe without a preceding act".into()))?;
        if observed.len() != self.nodes() {
            return Err(Error::Dimension {
                expected_rows: self.nodes(),
                expected_cols: 1,
                rows: observed.len(),
                cols: 1,
            });
        }
        for (k, task) in a.iter().enumerate() {
            let Some(m) = *task else { continue };
            let u = observed[k];
            if !u.is_finite() {
                return Err(Error::Feedback(format!("non-finite utility {u}")));
            }
            let c = self.counts.get(k, m) + 1.0;
            let theta = self.theta_hat.get(k, m);
            self.counts.set(k, m, c);
            self.theta_hat.set(k, m, theta + (u - theta) / c);
        }
        self.t += 1;
        Ok(())
    }
}

/// Indicator action rows of an assignment.
pub fn assignment_actions(a: &Assignment, tasks: usize) -> Matrix {
    let mut x = Matrix::zeros(a.len(), tasks);
    for (k, m) in a.iter().enumerate() {
        if let Some(m) = m {
            x.set(k, *m, 1.0);
        }
    }
    x
}
