use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use super::rng::{cell_streams, Purpose};
use crate::error::{Error, Result};
use crate::game::{allocate, task_gradient, utility_matrix, ActionProfile, AllocationMatrix, Bounds, GameSpec};
use crate::matrix::Matrix;
use crate::strategies::{
    assignment_actions, best_response, BgamState, GpState, LbwiConfig, LbwiState, LlrState, RewardScale,
    StrategyDescriptor, StrategyKind,
};

/// Everything that happened in one round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub t: u64,
    pub x: ActionProfile,
    pub a: AllocationMatrix,
    pub clean_utility: Matrix,
    pub observed_utility: Matrix,
}

#[derive(Debug, Clone)]
enum BanditCell {
    Bgam(BgamState),
    Lbwi(LbwiState),
    Random,
}

#[derive(Debug, Clone)]
enum Policy {
    /// One learner per (node, task), row-major.
    Bandit(Vec<BanditCell>),
    Gradient(Vec<GpState>),
    BestResponse(ActionProfile),
    Centralized(LlrState),
}

/// The learners of every node for one replica.
#[derive(Debug, Clone)]
pub struct Population {
    kind: StrategyKind,
    nodes: usize,
    tasks: usize,
    policy: Policy,
    rngs: Vec<ChaCha8Rng>,
}

impl Population {
    pub fn new(
        descriptor: &StrategyDescriptor,
        spec: &GameSpec,
        horizon: u64,
        bounds: &Bounds,
        seed: u64,
    ) -> Result<Self> {
        let p = descriptor.resolve(horizon)?;
        let cells = spec.nodes * spec.tasks;
        let (lo, hi) = spec.utility_range();
        let policy = match descriptor.strategy {
            StrategyKind::Bgam | StrategyKind::Bgd => {
                let proto = BgamState::configure(horizon, bounds, p.xi, p.beta, p.nu)?;
                Policy::Bandit(vec![BanditCell::Bgam(proto); cells])
            }
            StrategyKind::Lbwi | StrategyKind::Lb => {
                let cfg = LbwiConfig {
                    horizon,
                    intervals: p.intervals,
                    pulls_per_interval: p.pulls_per_interval,
                    gamma: p.gamma,
                    with_init: descriptor.strategy == StrategyKind::Lbwi,
                    reward_scale: RewardScale::new(lo, hi)?,
                };
                let proto = LbwiState::configure(cfg, Some(bounds))?;
                Policy::Bandit(vec![BanditCell::Lbwi(proto); cells])
            }
            StrategyKind::Rs => Policy::Bandit(vec![BanditCell::Random; cells]),
            StrategyKind::Gp => Policy::Gradient(vec![GpState::new(p.start, p.eta)?; cells]),
            StrategyKind::Br => {
                if !(0.0..=1.0).contains(&p.start) {
                    return Err(Error::Config(format!("initial action {} outside [0, 1]", p.start)));
                }
                Policy::BestResponse(ActionProfile::filled(spec.nodes, spec.tasks, p.start))
            }
            StrategyKind::Llr => Policy::Centralized(LlrState::new(spec.nodes, spec.tasks)?),
        };
        Ok(Population {
            kind: descriptor.strategy,
            nodes: spec.nodes,
            tasks: spec.tasks,
            policy,
            rngs: cell_streams(seed, Purpose::Learner, spec.nodes, spec.tasks),
        })
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    /// Collects this round's requests from every learner.
    pub fn act(&mut self) -> Result<Matrix> {
        let tasks = self.tasks;
        match &mut self.policy {
            Policy::Bandit(cells) => {
                let mut x = Matrix::zeros(self.nodes, tasks);
                for (i, (cell, rng)) in cells.iter_mut().zip(self.rngs.iter_mut()).enumerate() {
                    let v = match cell {
                        BanditCell::Bgam(s) => s.act(rng),
                        BanditCell::Lbwi(s) => s.act(rng)?,
                        BanditCell::Random => rand::Rng::random::<f64>(rng),
                    };
                    x.set(i / tasks, i % tasks, v);
                }
                Ok(x)
            }
            Policy::Gradient(states) => Ok(Matrix::from_fn(self.nodes, tasks, |k, m| states[k * tasks + m].act())),
            Policy::BestResponse(current) => Ok(current.matrix().clone()),
            Policy::Centralized(state) => Ok(assignment_actions(&state.act()?, tasks)),
        }
    }

    /// Routes feedback: bandit cells see only their own observed utility,
    /// full-information policies get the exact oracle.
    pub fn feed(&mut self, record: &RoundRecord, spec: &GameSpec) -> Result<()> {
        let tasks = self.tasks;
        match &mut self.policy {
            Policy::Bandit(cells) => {
                let observed = record.observed_utility.as_slice();
                for (cell, &u) in cells.iter_mut().zip(observed) {
                    match cell {
                        BanditCell::Bgam(s) => s.update(u)?,
                        BanditCell::Lbwi(s) => s.observe(u)?,
                        BanditCell::Random => {}
                    }
                }
            }
            Policy::Gradient(states) => {
                for (i, s) in states.iter_mut().enumerate() {
                    let (k, m) = (i / tasks, i % tasks);
                    let g = task_gradient(
                        record.x.get(k, m),
                        record.x.others_sum(k, m),
                        spec.params(k, m),
                        spec.barrier,
                    );
                    s.step(g);
                }
            }
            Policy::BestResponse(current) => {
                let mut next = Matrix::zeros(self.nodes, tasks);
                for k in 0..self.nodes {
                    next.row_mut(k).copy_from_slice(&best_response(k, &record.x, spec)?);
                }
                *current = ActionProfile::new(next)?;
            }
            Policy::Centralized(state) => {
                let assigned = state.last.clone().unwrap_or_default();
                let observed: Vec<f64> = assigned
                    .iter()
                    .enumerate()
                    .map(|(k, m)| m.map_or(0.0, |m| record.observed_utility.get(k, m)))
                    .collect();
                state.observe(&observed)?;
            }
        }
        Ok(())
    }
}

/// Per-cell Gaussian noise source.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    normal: Option<Normal<f64>>,
    rngs: Vec<ChaCha8Rng>,
}

impl NoiseSource {
    pub fn new(spec: &GameSpec, seed: u64) -> Result<Self> {
        let normal = if spec.noise_std > 0.0 {
            Some(Normal::new(0.0, spec.noise_std).map_err(|e| Error::Config(e.to_string()))?)
        } else {
            None
        };
        Ok(NoiseSource {
            normal,
            rngs: cell_streams(seed, Purpose::Noise, spec.nodes, spec.tasks),
        })
    }

    fn perturb(&mut self, clean: &Matrix) -> Matrix {
        let mut observed = clean.clone();
        if let Some(normal) = &self.normal {
            for (v, rng) in observed.as_mut_slice().iter_mut().zip(self.rngs.iter_mut()) {
                *v += normal.sample(rng);
            }
        }
        observed
    }
}

/// Plays round `t`: gather actions, allocate, score, add noise, feed back.
pub fn run_round(
    spec: &GameSpec,
    population: &mut Population,
    t: u64,
    noise: &mut NoiseSource,
) -> Result<RoundRecord> {
    let raw = population.act()?;
    if let Some((i, v)) = raw.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Protocol(format!(
            "{} emitted action {v} for node {}, task {} at round {t}",
            population.kind(),
            i / spec.tasks,
            i % spec.tasks
        )));
    }
    let x = ActionProfile::new(raw)?;
    let a = allocate(&x, spec)?;
    let clean_utility = utility_matrix(&x, spec)?;
    let observed_utility = noise.perturb(&clean_utility);
    let record = RoundRecord {
        t,
        x,
        a,
        clean_utility,
        observed_utility,
    };
    population.feed(&record, spec)?;
    Ok(record)
}
