//! The task-allocation game: parameters, proportional allocation and utilities.
//!
//! Each fog node `k` requests a fraction `x[k][m]` of every task `m`. Tasks are
//! split proportionally to the requests and each node's per-task utility is
//!
//! ```text
//! u = rho * (1 - exp(-a / rho)) + eps * sum_i x[i][m] - kappa * x[k][m]
//! ```
//!
//! where `a = x[k][m] / (sum_i x[i][m] + barrier)` is the allocated share.
//! A node's total utility is the sum over tasks, so every quantity here is
//! computed per task from the node's own request and the sum of the others'.

mod bounds;
mod calculus;

pub use bounds::{estimate_bounds, estimate_bounds_with, Bounds, DEFAULT_MIN_COLUMN_SUM};
pub use calculus::{
    dsc_gap, hessian_others, hessian_own, task_gradient, task_hessian_others, task_hessian_own,
    utility_gradient,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const DEFAULT_BARRIER: f64 = 1e-6;
pub const DEFAULT_NOISE_STD: f64 = 0.01;

/// Per-(node, task) heterogeneity indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskParams {
    pub rho: f64,
    pub eps: f64,
    pub kappa: f64,
}

impl TaskParams {
    pub fn new(rho: f64, eps: f64, kappa: f64) -> Self {
        TaskParams { rho, eps, kappa }
    }
}

/// Full game definition. Serialized as
/// `{K, M, rho, eps, kappa, barrier, noise_std}` with row-major matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    #[serde(rename = "K")]
    pub nodes: usize,
    #[serde(rename = "M")]
    pub tasks: usize,
    pub rho: Matrix,
    pub eps: Matrix,
    pub kappa: Matrix,
    #[serde(default = "default_barrier")]
    pub barrier: f64,
    #[serde(default = "default_noise_std")]
    pub noise_std: f64,
}

fn default_barrier() -> f64 {
    DEFAULT_BARRIER
}

fn default_noise_std() -> f64 {
    DEFAULT_NOISE_STD
}

/// Non-fatal findings from [`GameSpec::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SpecWarning {
    /// Convexity in the others' actions is only guaranteed for `rho > 0.5`.
    RhoAtOrBelowHalf { node: usize, task: usize, rho: f64 },
}

impl std::fmt::Display for SpecWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpecWarning::RhoAtOrBelowHalf { node, task, rho } => write!(
                f,
                "rho[{node}][{task}] = {rho} <= 0.5: utility may not be convex in the others' actions"
            ),
        }
    }
}

impl GameSpec {
    /// Builds and validates a spec with the default barrier and noise level.
    pub fn new(rho: Matrix, eps: Matrix, kappa: Matrix) -> Result<Self> {
        let (nodes, tasks) = rho.shape();
        let spec = GameSpec {
            nodes,
            tasks,
            rho,
            eps,
            kappa,
            barrier: DEFAULT_BARRIER,
            noise_std: DEFAULT_NOISE_STD,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_noise_std(mut self, noise_std: f64) -> Self {
        self.noise_std = noise_std;
        self
    }

    pub fn with_barrier(mut self, barrier: f64) -> Self {
        self.barrier = barrier;
        self
    }

    /// Checks every invariant; returns the list of soft warnings on success.
    pub fn validate(&self) -> Result<Vec<SpecWarning>> {
        if self.nodes == 0 || self.tasks == 0 {
            return Err(Error::Config(format!(
                "node and task counts must be positive (K={}, M={})",
                self.nodes, self.tasks
            )));
        }
        for (name, m) in [("rho", &self.rho), ("eps", &self.eps), ("kappa", &self.kappa)] {
            m.ensure_shape(self.nodes, self.tasks)?;
            for k in 0..self.nodes {
                for j in 0..self.tasks {
                    let v = m.get(k, j);
                    if !(v > 0.0 && v <= 1.0) {
                        return Err(Error::Config(format!(
                            "{name}[{k}][{j}] = {v} outside (0, 1]"
                        )));
                    }
                }
            }
        }
        if !(self.barrier > 0.0 && self.barrier.is_finite()) {
            return Err(Error::Config(format!("barrier must be > 0, got {}", self.barrier)));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::Config(format!(
                "noise_std must be >= 0, got {}",
                self.noise_std
            )));
        }
        let mut warnings = Vec::new();
        for k in 0..self.nodes {
            for j in 0..self.tasks {
                let rho = self.rho.get(k, j);
                if rho <= 0.5 {
                    warnings.push(SpecWarning::RhoAtOrBelowHalf { node: k, task: j, rho });
                }
            }
        }
        Ok(warnings)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: GameSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    #[inline]
    pub fn params(&self, node: usize, task: usize) -> TaskParams {
        TaskParams {
            rho: self.rho.get(node, task),
            eps: self.eps.get(node, task),
            kappa: self.kappa.get(node, task),
        }
    }

    pub fn check_node(&self, node: usize) -> Result<()> {
        if node >= self.nodes {
            return Err(Error::Index {
                index: node,
                len: self.nodes,
            });
        }
        Ok(())
    }

    /// Largest and smallest per-task utility any node can see; used to map raw
    /// utilities onto [0, 1] for exponential-weight learners.
    pub fn utility_range(&self) -> (f64, f64) {
        let max_of = |m: &Matrix| m.iter().copied().fold(f64::MIN, f64::max);
        let lo = -max_of(&self.kappa);
        let hi = max_of(&self.rho) + max_of(&self.eps) * self.nodes as f64;
        (lo, hi)
    }
}

/// Requested task fractions, one row per node. Every entry lies in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionProfile(Matrix);

impl ActionProfile {
    pub fn new(x: Matrix) -> Result<Self> {
        for (i, v) in x.iter().enumerate() {
            if !(0.0..=1.0).contains(v) {
                let (r, c) = (i / x.cols().max(1), i % x.cols().max(1));
                return Err(Error::Config(format!("action x[{r}][{c}] = {v} outside [0, 1]")));
            }
        }
        Ok(ActionProfile(x))
    }

    pub fn zeros(nodes: usize, tasks: usize) -> Self {
        ActionProfile(Matrix::zeros(nodes, tasks))
    }

    pub fn filled(nodes: usize, tasks: usize, value: f64) -> Self {
        assert!((0.0..=1.0).contains(&value));
        ActionProfile(Matrix::filled(nodes, tasks, value))
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    #[inline]
    pub fn get(&self, node: usize, task: usize) -> f64 {
        self.0.get(node, task)
    }

    /// Sets one entry; the value is clamped into [0, 1].
    pub fn set(&mut self, node: usize, task: usize, v: f64) {
        self.0.set(node, task, v.clamp(0.0, 1.0));
    }

    pub fn row(&self, node: usize) -> &[f64] {
        self.0.row(node)
    }

    pub fn set_row(&mut self, node: usize, row: &[f64]) {
        for (task, &v) in row.iter().enumerate() {
            self.set(node, task, v);
        }
    }

    pub fn nodes(&self) -> usize {
        self.0.rows()
    }

    pub fn tasks(&self) -> usize {
        self.0.cols()
    }

    /// Sum of every other node's request for `task`.
    pub fn others_sum(&self, node: usize, task: usize) -> f64 {
        (0..self.nodes())
            .filter(|&i| i != node)
            .map(|i| self.get(i, task))
            .sum()
    }

    pub fn max_abs_diff(&self, other: &ActionProfile) -> f64 {
        self.0.max_abs_diff(&other.0)
    }

    fn ensure_matches(&self, spec: &GameSpec) -> Result<()> {
        self.0.ensure_shape(spec.nodes, spec.tasks)
    }
}

/// Allocated task shares, one row per node.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct AllocationMatrix(Matrix);

impl AllocationMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    #[inline]
    pub fn get(&self, node: usize, task: usize) -> f64 {
        self.0.get(node, task)
    }
}

/// Proportional allocation with the entry barrier in every denominator.
pub fn allocate(x: &ActionProfile, spec: &GameSpec) -> Result<AllocationMatrix> {
    x.ensure_matches(spec)?;
    let sums = x.matrix().column_sums();
    let a = Matrix::from_fn(spec.nodes, spec.tasks, |k, m| {
        x.get(k, m) / (sums[m] + spec.barrier)
    });
    Ok(AllocationMatrix(a))
}

/// Risk-averse completion reward `rho * (1 - exp(-a / rho))`.
#[inline]
pub fn reward_phi(share: f64, rho: f64) -> f64 {
    -rho * (-share / rho).exp_m1()
}

/// Utility of one node on one task given its request and the others' total.
#[inline]
pub fn task_utility(x_own: f64, others_sum: f64, p: TaskParams, barrier: f64) -> f64 {
    let column = x_own + others_sum;
    let share = x_own / (column + barrier);
    reward_phi(share, p.rho) + p.eps * column - p.kappa * x_own
}

/// Per-task utilities of every node, row `k` = node `k`.
pub fn utility_matrix(x: &ActionProfile, spec: &GameSpec) -> Result<Matrix> {
    x.ensure_matches(spec)?;
    let sums = x.matrix().column_sums();
    Ok(Matrix::from_fn(spec.nodes, spec.tasks, |k, m| {
        let own = x.get(k, m);
        task_utility(own, sums[m] - own, spec.params(k, m), spec.barrier)
    }))
}

/// Total utility of node `k`: the task utilities summed in task order.
pub fn total_utility(node: usize, x: &ActionProfile, spec: &GameSpec) -> Result<f64> {
    spec.check_node(node)?;
    x.ensure_matches(spec)?;
    let mut total = 0.0;
    for m in 0..spec.tasks {
        total += task_utility(
            x.get(node, m),
            x.others_sum(node, m),
            spec.params(node, m),
            spec.barrier,
        );
    }
    Ok(total)
}


#[cfg(test)]
mod tests {
    use super::testing::game1;
    use super::*;
    use approx::assert_relative_eq;

    const TINY: f64 = 1e-300;

    #[test]
    fn symmetric_column_splits_evenly() {
        let spec = game1().with_barrier(TINY);
        let x = ActionProfile::from_rows(vec![vec![0.5, 0.0], vec![0.5, 0.0]]).unwrap();
        let a = allocate(&x, &spec).unwrap();
        assert_relative_eq!(a.get(0, 0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(a.get(1, 0), 0.5, epsilon = 1e-15);
        assert_eq!(a.get(0, 1), 0.0);
        assert_eq!(a.get(1, 1), 0.0);
    }

    #[test]
    fn barrier_share() {
        let spec = game1();
        let x = ActionProfile::from_rows(vec![vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let a = allocate(&x, &spec).unwrap();
        // 1 / (1 + 1e-6)
        assert_relative_eq!(a.get(0, 0), 0.999_999_000_001, epsilon = 1e-15);
        assert_eq!(a.get(1, 0), 0.0);
    }

    #[test]
    fn allocate_rejects_wrong_shape() {
        let spec = game1();
        let x = ActionProfile::zeros(3, 2);
        assert!(matches!(allocate(&x, &spec), Err(Error::Dimension { .. })));
    }

    #[test]
    fn reward_values() {
        assert_eq!(reward_phi(0.0, 0.3), 0.0);
        // 0.9 * (1 - e^{-1/0.9}), 0.5 * (1 - e^{-1})
        assert_relative_eq!(reward_phi(1.0, 0.9), 0.603_726_310_972_884_9, epsilon = 1e-14);
        assert_relative_eq!(reward_phi(0.5, 0.5), 0.316_060_279_414_278_8, epsilon = 1e-14);
    }

    #[test]
    fn task_utility_examples() {
        let p = TaskParams::new(0.9, 0.1, 0.1);
        assert_relative_eq!(task_utility(0.0, 1.0, p, DEFAULT_BARRIER), 0.1, epsilon = 1e-15);
        assert_relative_eq!(task_utility(1.0, 0.0, p, TINY), 0.603_726_310_972_884_9, epsilon = 1e-14);
        // 0.9 (1 - e^{-0.5/0.9}) + 0.1 - 0.05
        assert_relative_eq!(task_utility(0.5, 0.5, p, TINY), 0.433_621_921_336_310_5, epsilon = 1e-12);
    }

    #[test]
    fn total_utility_examples() {
        let spec = game1().with_barrier(TINY);
        let zero = ActionProfile::zeros(2, 2);
        assert_eq!(total_utility(0, &zero, &spec).unwrap(), 0.0);

        let diag = ActionProfile::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_relative_eq!(
            total_utility(0, &diag, &spec).unwrap(),
            0.603_726_310_972_884_9 + 0.03,
            epsilon = 1e-12
        );
        assert!(matches!(total_utility(2, &diag, &spec), Err(Error::Index { .. })));
    }

    #[test]
    fn single_task_total_is_task_utility() {
        let spec = GameSpec::new(
            Matrix::from_rows(vec![vec![0.7], vec![0.8]]).unwrap(),
            Matrix::from_rows(vec![vec![0.2], vec![0.1]]).unwrap(),
            Matrix::from_rows(vec![vec![0.3], vec![0.4]]).unwrap(),
        )
        .unwrap();
        let x = ActionProfile::from_rows(vec![vec![0.3], vec![0.6]]).unwrap();
        let direct = task_utility(0.3, 0.6, spec.params(0, 0), spec.barrier);
        assert_eq!(total_utility(0, &x, &spec).unwrap(), direct);
    }

    #[test]
    fn game1_validates_with_one_warning() {
        let w = game1().validate().unwrap();
        assert_eq!(w, vec![SpecWarning::RhoAtOrBelowHalf { node: 0, task: 1, rho: 0.5 }]);
    }

    #[test]
    fn validation_rejects_bad_entries() {
        let mut spec = game1();
        spec.kappa.set(1, 1, 0.0);
        assert!(spec.validate().is_err());
        let mut spec = game1();
        spec.barrier = 0.0;
        assert!(spec.validate().is_err());
        let mut spec = game1();
        spec.noise_std = -1.0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let spec = game1().with_noise_std(0.02);
        let json = spec.to_json().unwrap();
        assert!(json.contains("\"K\": 2"));
        let back = GameSpec::from_json(&json).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn action_profile_rejects_out_of_range() {
        assert!(ActionProfile::from_rows(vec![vec![1.5]]).is_err());
        assert!(ActionProfile::from_rows(vec![vec![-0.1]]).is_err());
    }
}
