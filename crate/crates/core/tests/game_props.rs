use fogalloc_core::game::{dsc_gap, hessian_own, total_utility, utility_gradient};
use fogalloc_core::{allocate, ActionProfile, GameSpec, Matrix};
use proptest::prelude::*;

fn spec_strategy(nodes: usize, tasks: usize) -> impl Strategy<Value = GameSpec> {
    let cells = nodes * tasks;
    (
        prop::collection::vec(0.05f64..1.0, cells),
        prop::collection::vec(0.001f64..0.3, cells),
        prop::collection::vec(0.01f64..1.0, cells),
    )
        .prop_map(move |(r, e, k)| {
            let m = |v: Vec<f64>| Matrix::from_fn(nodes, tasks, |i, j| v[i * tasks + j]);
            GameSpec::new(m(r), m(e), m(k)).unwrap()
        })
}

fn profile(nodes: usize, tasks: usize, lo: f64, hi: f64) -> impl Strategy<Value = ActionProfile> {
    prop::collection::vec(lo..hi, nodes * tasks)
        .prop_map(move |v| ActionProfile::new(Matrix::from_fn(nodes, tasks, |i, j| v[i * tasks + j])).unwrap())
}

proptest! {
    #[test]
    fn shares_never_exceed_the_task(spec in spec_strategy(3, 4), x in profile(3, 4, 0.0, 1.0)) {
        let a = allocate(&x, &spec).unwrap();
        for m in 0..4 {
            let total: f64 = (0..3).map(|k| x.get(k, m)).sum();
            let shares: f64 = (0..3).map(|k| a.get(k, m)).sum();
            prop_assert!((shares - total / (total + spec.barrier)).abs() < 1e-12);
            prop_assert!(shares <= 1.0);
        }
    }

    #[test]
    fn gradient_matches_central_difference(spec in spec_strategy(2, 3), x in profile(2, 3, 0.05, 0.95)) {
        let h = 1e-6;
        for k in 0..2 {
            let g = utility_gradient(k, &x, &spec).unwrap();
            for m in 0..3 {
                let (mut up, mut down) = (x.clone(), x.clone());
                up.set(k, m, x.get(k, m) + h);
                down.set(k, m, x.get(k, m) - h);
                let fd = (total_utility(k, &up, &spec).unwrap() - total_utility(k, &down, &spec).unwrap()) / (2.0 * h);
                prop_assert!((g[m] - fd).abs() < 1e-6 * g[m].abs().max(1.0));
            }
        }
    }

    #[test]
    fn utility_is_concave_in_own_action(spec in spec_strategy(3, 2), x in profile(3, 2, 0.0, 1.0)) {
        for k in 0..3 {
            for m in 0..2 {
                prop_assert!(hessian_own(k, m, &x, &spec).unwrap() <= 1e-12);
            }
        }
    }

    #[test]
    fn pseudo_gradient_is_monotone(spec in spec_strategy(2, 2), a in profile(2, 2, 0.0, 1.0), b in profile(2, 2, 0.0, 1.0)) {
        prop_assume!(a != b);
        prop_assert!(dsc_gap(&a, &b, &spec).unwrap() < 0.0);
    }
}
