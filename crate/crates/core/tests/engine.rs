use fogalloc_core::dataset::{builtin_game1, builtin_game2};
use fogalloc_core::engine::{
    epsilon_gap, replica_seed, run_campaign, run_round, solve_nash, update_regret, CampaignConfig, NashSolution,
    NoiseSource, Population, RegretLedger, RegretMode, RoundRecord,
};
use fogalloc_core::{
    allocate, estimate_bounds, utility_matrix, ActionProfile, Error, GameSpec, Matrix, StrategyDescriptor,
    StrategyKind,
};

fn population(kind: StrategyKind, spec: &GameSpec, horizon: u64, seed: u64) -> Population {
    let bounds = estimate_bounds(spec, 50).unwrap();
    Population::new(&StrategyDescriptor::new(kind), spec, horizon, &bounds, seed).unwrap()
}

fn play(kind: StrategyKind, spec: &GameSpec, horizon: u64, seed: u64) -> Vec<RoundRecord> {
    let mut pop = population(kind, spec, horizon, seed);
    let mut noise = NoiseSource::new(spec, seed).unwrap();
    (1..=horizon).map(|t| run_round(spec, &mut pop, t, &mut noise).unwrap()).collect()
}

fn symmetric_spec() -> GameSpec {
    let m = |v: f64| Matrix::filled(3, 2, v);
    GameSpec::new(m(0.8), m(0.1), m(0.3)).unwrap()
}

#[test]
fn same_seed_same_trajectory() {
    let spec = builtin_game1();
    for kind in StrategyKind::ALL {
        assert_eq!(play(kind, &spec, 300, 5), play(kind, &spec, 300, 5), "{kind}");
    }
    assert_ne!(play(StrategyKind::Bgam, &spec, 50, 5), play(StrategyKind::Bgam, &spec, 50, 6));
}

#[test]
fn noiseless_feedback_is_clean() {
    let spec = builtin_game1().with_noise_std(0.0);
    for r in play(StrategyKind::Lbwi, &spec, 200, 1) {
        assert_eq!(r.observed_utility, r.clean_utility);
    }
}

#[test]
fn noise_is_centred_with_configured_spread() {
    let spec = builtin_game1().with_noise_std(0.05);
    let diffs: Vec<f64> = play(StrategyKind::Rs, &spec, 20_000, 3)
        .iter()
        .flat_map(|r| {
            r.observed_utility
                .iter()
                .zip(r.clean_utility.iter())
                .map(|(o, c)| o - c)
                .collect::<Vec<_>>()
        })
        .collect();
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let std = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!(mean.abs() < 4.0 * 0.05 / n.sqrt(), "mean {mean}");
    assert!((std - 0.05).abs() < 0.002, "std {std}");
}

#[test]
fn bandit_cells_ignore_other_cells_feedback() {
    let spec = builtin_game1();
    for kind in [StrategyKind::Bgam, StrategyKind::Lbwi, StrategyKind::Lb] {
        let mut pop = population(kind, &spec, 1000, 9);
        let mut noise = NoiseSource::new(&spec, 9).unwrap();
        for t in 1..=150 {
            run_round(&spec, &mut pop, t, &mut noise).unwrap();
        }
        let x = ActionProfile::new(pop.act().unwrap()).unwrap();
        let clean = utility_matrix(&x, &spec).unwrap();
        let record = RoundRecord {
            t: 151,
            a: allocate(&x, &spec).unwrap(),
            x,
            observed_utility: clean.clone(),
            clean_utility: clean,
        };
        let mut tampered = record.clone();
        for (k, m) in [(0, 1), (1, 0), (1, 1)] {
            tampered.observed_utility.set(k, m, 5.0);
            tampered.clean_utility.set(k, m, -5.0);
        }
        let (mut a, mut b) = (pop.clone(), pop);
        a.feed(&record, &spec).unwrap();
        b.feed(&tampered, &spec).unwrap();
        for _ in 0..20 {
            assert_eq!(a.act().unwrap().get(0, 0), b.act().unwrap().get(0, 0), "{kind}");
        }
    }
}

#[test]
fn game1_equilibrium_fixture() {
    let nash = solve_nash(&builtin_game1(), 1e-9, 10_000, 20).unwrap();
    let expected = [[1.0, 0.068_675_344_247_888_14], [0.104_563_126_383_857_73, 1.0]];
    for (k, row) in expected.iter().enumerate() {
        for (m, v) in row.iter().enumerate() {
            assert!((nash.x_star.get(k, m) - v).abs() < 1e-6, "({k}, {m})");
        }
    }
    assert!(nash.converged);
    assert!(nash.eps_gap < 1e-8);
}

#[test]
fn symmetric_game_has_symmetric_equilibrium() {
    let spec = symmetric_spec();
    let nash = solve_nash(&spec, 1e-8, 10_000, 10).unwrap();
    let v = nash.x_star.get(0, 0);
    assert!(v > 0.0 && v < 1.0);
    for k in 0..3 {
        for m in 0..2 {
            assert!((nash.x_star.get(k, m) - v).abs() < 1e-6);
        }
    }
    let u0 = nash.utilities[0];
    assert!(nash.utilities.iter().all(|u| (u - u0).abs() < 1e-6));
}

#[test]
fn zero_profile_is_not_an_equilibrium() {
    let spec = builtin_game1();
    assert!(epsilon_gap(&ActionProfile::zeros(2, 2), &spec).unwrap() > 0.0);
    let game2 = builtin_game2().unwrap();
    assert!(epsilon_gap(&ActionProfile::zeros(10, 10), &game2).unwrap() > 0.0);
}

#[test]
fn gradient_play_reaches_the_equilibrium() {
    let spec = builtin_game1().with_noise_std(0.0);
    let nash = solve_nash(&spec, 1e-8, 10_000, 20).unwrap();
    let last = play(StrategyKind::Gp, &spec, 10_000, 0).pop().unwrap();
    assert!(last.x.max_abs_diff(&nash.x_star) < 1e-2);
}

#[test]
fn regret_against_the_equilibrium() {
    let spec = builtin_game1();
    let nash = solve_nash(&spec, 1e-9, 10_000, 5).unwrap();
    let mut ledger = RegretLedger::new(RegretMode::NeReference, &nash);
    let record = play(StrategyKind::Rs, &spec, 1, 2).remove(0);
    update_regret(&mut ledger, &record, &spec).unwrap();
    update_regret(&mut ledger, &record, &spec).unwrap();
    for k in 0..2 {
        let realised: f64 = record.clean_utility.row(k).iter().sum();
        let inst = nash.utilities[k] - realised;
        assert!((ledger.instantaneous[k][0] - inst).abs() < 1e-12);
        assert!((ledger.cumulative[k][1] - 2.0 * inst).abs() < 1e-12);
    }

    let at_ne = NashSolution {
        utilities: vec![0.0; 3],
        ..nash
    };
    let mut bad = RegretLedger::new(RegretMode::NeReference, &at_ne);
    assert!(matches!(update_regret(&mut bad, &record, &spec), Err(Error::Dimension { .. })));
}

#[test]
fn per_round_best_response_regret_is_non_negative() {
    let spec = builtin_game1();
    let nash = solve_nash(&spec, 1e-8, 10_000, 5).unwrap();
    let mut ledger = RegretLedger::new(RegretMode::PerRoundBr, &nash);
    for r in play(StrategyKind::Rs, &spec, 100, 4) {
        update_regret(&mut ledger, &r, &spec).unwrap();
    }
    assert!(ledger.instantaneous.iter().flatten().all(|v| *v >= 0.0));
}

fn small_campaign(n_seeds: usize) -> CampaignConfig {
    let strategies = [StrategyKind::Bgam, StrategyKind::Lbwi, StrategyKind::Llr]
        .iter()
        .map(|k| StrategyDescriptor::new(*k))
        .collect();
    CampaignConfig::new(builtin_game1(), strategies, 400, n_seeds, 11)
}

#[test]
fn single_seed_campaign() {
    let result = run_campaign(&small_campaign(1)).unwrap();
    assert_eq!(result.replicas.len(), 3);
    for s in &result.summaries {
        assert_eq!(s.seeds, 1);
        assert_eq!(s.final_average_regret.std, 0.0);
    }
}

#[test]
fn replicas_do_not_depend_on_seed_order() {
    let forward = run_campaign(&small_campaign(3)).unwrap();
    let mut config = small_campaign(3);
    config.seeds = Some((0..3).rev().map(|i| replica_seed(11, i)).collect());
    let backward = run_campaign(&config).unwrap();
    for r in &forward.replicas {
        let twin = backward
            .replicas
            .iter()
            .find(|b| b.strategy == r.strategy && b.seed == r.seed)
            .unwrap();
        assert_eq!(r.regret_log, twin.regret_log);
        assert_eq!(r.final_window_mean, twin.final_window_mean);
    }
}

#[test]
fn campaign_rejects_bad_configs() {
    let mut config = small_campaign(1);
    config.horizon = 0;
    assert!(matches!(run_campaign(&config), Err(Error::Config(_))));
    let mut config = small_campaign(1);
    config.strategies.push(StrategyDescriptor::new(StrategyKind::Bgam));
    assert!(matches!(run_campaign(&config), Err(Error::Config(_))));
}
