use crate::error::Result;
use crate::game::{task_utility, ActionProfile, GameSpec, TaskParams};
use crate::optimize::golden_section_max;

pub const BR_TOLERANCE: f64 = 1e-8;

/// Maximiser of one task utility given the others' total request.
pub fn task_best_response(others_sum: f64, p: TaskParams, barrier: f64) -> (f64, f64) {
    golden_section_max(|x| task_utility(x, others_sum, p, barrier), 0.0, 1.0, BR_TOLERANCE)
}

/// Node `node`'s best reply to the rest of `x`; its own row is ignored.
pub fn best_response(node: usize, x: &ActionProfile, spec: &GameSpec) -> Result<Vec<f64>> {
    spec.check_node(node)?;
    x.matrix().ensure_shape(spec.nodes, spec.tasks)?;
    Ok((0..spec.tasks)
        .map(|m| task_best_response(x.others_sum(node, m), spec.params(node, m), spec.barrier).0)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{task_gradient, testing::game1};

    fn bisect_gradient_root(others: f64, p: TaskParams) -> f64 {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if task_gradient(mid, others, p, 1e-6) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn costly_task_is_dropped() {
        let p = TaskParams::new(0.6, 0.05, 0.9);
        assert_eq!(task_best_response(3.0, p, 1e-6).0, 0.0);
    }

    #[test]
    fn interior_maximiser_matches_gradient_root() {
        for (others, p) in [
            (0.5, TaskParams::new(0.6, 0.05, 0.75)),
            (0.9, TaskParams::new(0.7, 0.2, 0.6)),
            (2.0, TaskParams::new(0.9, 0.1, 0.4)),
        ] {
            let root = bisect_gradient_root(others, p);
            assert!(root > 0.0 && root < 1.0);
            assert!((task_best_response(others, p, 1e-6).0 - root).abs() < 1e-6);
        }
    }

    #[test]
    fn agrees_with_fine_grid_scan() {
        let p = TaskParams::new(0.6, 0.05, 0.75);
        for others in [0.05, 0.3, 0.8] {
            let f = |x: f64| task_utility(x, others, p, 1e-6);
            let grid = (0..=1_000_000)
                .map(|i| i as f64 * 1e-6)
                .fold((0.0, f64::MIN), |b, x| if f(x) > b.1 { (x, f(x)) } else { b });
            assert!((task_best_response(others, p, 1e-6).0 - grid.0).abs() < 1e-5);
        }
    }

    #[test]
    fn best_response_ignores_own_row() {
        let spec = game1();
        let a = ActionProfile::from_rows(vec![vec![0.1, 0.9], vec![0.3, 0.4]]).unwrap();
        let b = ActionProfile::from_rows(vec![vec![0.8, 0.2], vec![0.3, 0.4]]).unwrap();
        assert_eq!(best_response(0, &a, &spec).unwrap(), best_response(0, &b, &spec).unwrap());
    }
}
