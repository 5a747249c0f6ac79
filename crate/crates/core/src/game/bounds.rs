use serde::{Deserialize, Serialize};

use super::{task_gradient, task_hessian_others, task_hessian_own, task_utility, GameSpec};
use crate::error::{Error, Result};

/// Grid maxima are inflated by this factor to cover undersampling.
const SAFETY_FACTOR: f64 = 1.1;

/// Lipschitz and Hessian estimates only consider grid points whose task column
/// carries at least this much total request. Near an empty column the
/// derivatives grow like `1 / barrier`, which says nothing about how the
/// utility behaves once a task is actually being served.
pub const DEFAULT_MIN_COLUMN_SUM: f64 = 1.0;

/// Regularity constants of the per-task utility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    /// Lipschitz constant in the node's own request.
    pub lipschitz: f64,
    /// Largest utility magnitude.
    pub utility: f64,
    /// Largest second-derivative magnitude.
    pub hessian: f64,
}

impl Bounds {
    pub fn new(lipschitz: f64, utility: f64, hessian: f64) -> Result<Self> {
        let b = Bounds {
            lipschitz,
            utility,
            hessian,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lipschitz", self.lipschitz),
            ("utility", self.utility),
            ("hessian", self.hessian),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("bound {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Smallest phase-one interval count satisfying `N >= 8H / L`.
    pub fn min_intervals(&self) -> f64 {
        8.0 * self.hessian / self.lipschitz
    }
}

pub fn estimate_bounds(spec: &GameSpec, grid_resolution: usize) -> Result<Bounds> {
    estimate_bounds_with(spec, grid_resolution, DEFAULT_MIN_COLUMN_SUM)
}

/// Grid estimate of [`Bounds`] over own request `x` in [0, 1] and others' total
/// `X` in [0, K - 1], for every (node, task) of the spec.
///
/// `utility` covers the whole grid; `lipschitz` and `hessian` cover the points
/// with `x + X >= min_column_sum` (clamped to the largest reachable column sum).
pub fn estimate_bounds_with(
    spec: &GameSpec,
    grid_resolution: usize,
    min_column_sum: f64,
) -> Result<Bounds> {
    if grid_resolution < 10 {
        return Err(Error::Config(format!(
            "grid resolution must be at least 10, got {grid_resolution}"
        )));
    }
    let max_others = (spec.nodes - 1) as f64;
    let floor = min_column_sum.min(1.0 + max_others);
    let steps = grid_resolution as f64;

    let (mut lipschitz, mut utility, mut hessian) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..spec.nodes {
        for m in 0..spec.tasks {
            let p = spec.params(k, m);
            for i in 0..=grid_resolution {
                let x = i as f64 / steps;
                for j in 0..=grid_resolution {
                    let others = max_others * j as f64 / steps;
                    utility = utility.max(task_utility(x, others, p, spec.barrier).abs());
                    if x + others + 1e-12 < floor {
                        continue;
                    }
                    lipschitz = lipschitz.max(task_gradient(x, others, p, spec.barrier).abs());
                    hessian = hessian
                        .max(task_hessian_own(x, others, p, spec.barrier).abs())
                        .max(task_hessian_others(x, others, p, spec.barrier).abs());
                }
            }
        }
    }
    Bounds::new(
        SAFETY_FACTOR * lipschitz.max(f64::EPSILON),
        SAFETY_FACTOR * utility.max(f64::EPSILON),
        SAFETY_FACTOR * hessian.max(f64::EPSILON),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::testing::game1;
    use crate::matrix::Matrix;

    #[test]
    fn rejects_coarse_grid() {
        assert!(estimate_bounds(&game1(), 5).is_err());
    }

    #[test]
    fn eps_equal_kappa_lipschitz_bounded_by_inverse_column_sum() {
        let m = |v: f64| Matrix::filled(2, 2, v);
        let spec = GameSpec::new(m(0.8), m(0.2), m(0.2)).unwrap();
        let b = estimate_bounds(&spec, 100).unwrap();
        // Gradient is X e / S^2 <= 1 / S <= 1 on the active region.
        assert!(b.lipschitz <= SAFETY_FACTOR * 1.0 + 1e-12);
        // Attained at x = 0, X = 1.
        assert!(b.lipschitz >= SAFETY_FACTOR * 0.999);
    }

    #[test]
    fn utility_bound_dominates_grid() {
        let spec = game1();
        let b = estimate_bounds(&spec, 50).unwrap();
        for k in 0..2 {
            for m in 0..2 {
                for i in 0..=50 {
                    for j in 0..=50 {
                        let u = task_utility(i as f64 / 50.0, j as f64 / 50.0, spec.params(k, m), spec.barrier);
                        assert!(u.abs() <= b.utility);
                    }
                }
            }
        }
    }

    #[test]
    fn game1_regression_fixture() {
        let b = estimate_bounds(&game1(), 100).unwrap();
        approx::assert_relative_eq!(b.lipschitz, 1.264_998_900_001_1, max_relative = 1e-9);
        approx::assert_relative_eq!(b.utility, 0.811_678_228_815_151_3, max_relative = 1e-9);
        approx::assert_relative_eq!(b.hessian, 4.399_991_200_013_201_5, max_relative = 1e-9);
    }
}
