use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nash::{epsilon_gap, solve_nash_with, NashSettings, NashSolution};
use super::regret::{regret_slope, ProfileAverager, RegretLedger, RegretMode};
use super::rng::replica_seed;
use super::round::{run_round, NoiseSource, Population, RoundRecord};
use crate::error::{Error, Result};
use crate::game::{estimate_bounds, Bounds, GameSpec};
use crate::matrix::Matrix;
use crate::strategies::{StrategyDescriptor, StrategyKind};

pub const DEFAULT_FINAL_WINDOW: u64 = 1000;
pub const DEFAULT_HISTOGRAM_BINS: usize = 20;
pub const DEFAULT_HISTOGRAM_FROM: f64 = 0.9;
pub const DEFAULT_GAP_CHECKPOINTS: usize = 8;
pub const DEFAULT_BOUNDS_GRID: usize = 100;

fn default_final_window() -> u64 {
    DEFAULT_FINAL_WINDOW
}
fn default_histogram_bins() -> usize {
    DEFAULT_HISTOGRAM_BINS
}
fn default_histogram_from() -> f64 {
    DEFAULT_HISTOGRAM_FROM
}
fn default_gap_checkpoints() -> usize {
    DEFAULT_GAP_CHECKPOINTS
}
fn default_bounds_grid() -> usize {
    DEFAULT_BOUNDS_GRID
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub spec: GameSpec,
    pub strategies: Vec<StrategyDescriptor>,
    pub horizon: u64,
    pub n_seeds: usize,
    pub master_seed: u64,
    /// Explicit replica seeds; derived from `master_seed` when absent.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub regret_mode: RegretMode,
    /// Stride of the logged regret series; `max(1, T / 5000)` when absent.
    #[serde(default)]
    pub log_every: Option<u64>,
    #[serde(default = "default_final_window")]
    pub final_window: u64,
    #[serde(default = "default_histogram_bins")]
    pub histogram_bins: usize,
    /// Histograms and tail means cover rounds after this fraction of `T`.
    #[serde(default = "default_histogram_from")]
    pub histogram_from: f64,
    #[serde(default = "default_gap_checkpoints")]
    pub gap_checkpoints: usize,
    #[serde(default = "default_bounds_grid")]
    pub bounds_grid: usize,
    #[serde(default)]
    pub nash: NashSettings,
}

impl CampaignConfig {
    pub fn new(spec: GameSpec, strategies: Vec<StrategyDescriptor>, horizon: u64, n_seeds: usize, master_seed: u64) -> Self {
        CampaignConfig {
            spec,
            strategies,
            horizon,
            n_seeds,
            master_seed,
            seeds: None,
            regret_mode: RegretMode::default(),
            log_every: None,
            final_window: DEFAULT_FINAL_WINDOW,
            histogram_bins: DEFAULT_HISTOGRAM_BINS,
            histogram_from: DEFAULT_HISTOGRAM_FROM,
            gap_checkpoints: DEFAULT_GAP_CHECKPOINTS,
            bounds_grid: DEFAULT_BOUNDS_GRID,
            nash: NashSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("no strategies requested".into()));
        }
        if let Some(seeds) = &self.seeds {
            if seeds.is_empty() {
                return Err(Error::Config("explicit seed list is empty".into()));
            }
        } else if self.n_seeds == 0 {
            return Err(Error::Config("need at least one seed".into()));
        }
        if self.histogram_bins == 0 || self.final_window == 0 || self.gap_checkpoints == 0 {
            return Err(Error::Config("window sizes and bin counts must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.histogram_from) {
            return Err(Error::Config("histogram start fraction must lie in [0, 1)".into()));
        }
        if self.log_every == Some(0) {
            return Err(Error::Config("log stride must be positive".into()));
        }
        for (i, d) in self.strategies.iter().enumerate() {
            d.resolve(self.horizon)?;
            if self.strategies[..i].iter().any(|o| o.strategy == d.strategy) {
                return Err(Error::Config(format!("strategy {} listed twice", d.strategy)));
            }
        }
        Ok(())
    }

    pub fn replica_seeds(&self) -> Vec<u64> {
        match &self.seeds {
            Some(s) => s.clone(),
            None => (0..self.n_seeds).map(|i| replica_seed(self.master_seed, i)).collect(),
        }
    }

    pub fn log_stride(&self) -> u64 {
        self.log_every.unwrap_or((self.horizon / 5000).max(1))
    }

    fn final_window_start(&self) -> u64 {
        self.horizon - self.final_window.min(self.horizon)
    }

    fn histogram_start(&self) -> u64 {
        (self.histogram_from * self.horizon as f64).floor() as u64
    }

    /// Rounds at which the time-averaged profile's gap is measured.
    pub fn gap_times(&self) -> Vec<u64> {
        let n = self.gap_checkpoints as u64;
        let mut v: Vec<u64> = (1..=n).map(|j| (self.horizon * j / n).max(1)).collect();
        v.dedup();
        v
    }
}

/// Precomputed game quantities shared by every replica.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameContext {
    pub bounds: Bounds,
    pub nash: NashSolution,
    pub reward_range: (f64, f64),
}

impl GameContext {
    pub fn new(config: &CampaignConfig) -> Result<Self> {
        Ok(GameContext {
            bounds: estimate_bounds(&config.spec, config.bounds_grid)?,
            nash: solve_nash_with(&config.spec, &config.nash)?,
            reward_range: config.spec.utility_range(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretPoint {
    pub t: u64,
    pub cumulative: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub t: u64,
    pub gap: f64,
}

/// Action-frequency counts over equal-width bins of [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bins: usize,
    /// First round included.
    pub from_t: u64,
    /// `counts[k * M + m][bin]`
    pub counts: Vec<Vec<u64>>,
}

impl Histogram {
    fn new(cells: usize, bins: usize, from_t: u64) -> Self {
        Histogram {
            bins,
            from_t,
            counts: vec![vec![0; bins]; cells],
        }
    }

    fn push(&mut self, x: &Matrix) {
        for (c, v) in self.counts.iter_mut().zip(x.iter()) {
            let b = ((v * self.bins as f64) as usize).min(self.bins - 1);
            c[b] += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaResult {
    pub strategy: StrategyKind,
    pub replica: usize,
    pub seed: u64,
    pub regret_log: Vec<RegretPoint>,
    pub final_cumulative: Vec<f64>,
    /// Node mean of `R_k(T) / T`.
    pub final_average_regret: f64,
    /// Node mean of `R_k(T) / (T U*_k)`.
    pub normalized_average_regret: f64,
    /// Log-log slope of the node-summed cumulative regret on `[T/2, T]`.
    pub slope: Option<f64>,
    pub slope_error: Option<String>,
    pub final_window_mean: Matrix,
    pub tail_mean: Matrix,
    pub histogram: Histogram,
    pub gap_trajectory: Vec<GapPoint>,
}

impl ReplicaResult {
    /// Logged cumulative regret at the last logged round not after `t`.
    pub fn cumulative_at(&self, t: u64) -> Option<&RegretPoint> {
        self.regret_log.iter().take_while(|p| p.t <= t).last()
    }

    pub fn gap_at(&self, t: u64) -> Option<f64> {
        self.gap_trajectory.iter().find(|g| g.t == t).map(|g| g.gap)
    }
}

pub type TraceSink<'a> = &'a mut dyn FnMut(&RoundRecord) -> Result<()>;

fn normalized(regret: &[f64], reference: &[f64], t: f64) -> f64 {
    let n = regret.len() as f64;
    regret
        .iter()
        .zip(reference)
        .map(|(r, u)| r / t / u.abs().max(f64::MIN_POSITIVE))
        .sum::<f64>()
        / n
}

/// Plays one replica of `descriptor` for the configured horizon.
pub fn run_replica(
    config: &CampaignConfig,
    context: &GameContext,
    descriptor: &StrategyDescriptor,
    replica: usize,
    seed: u64,
    mut sink: Option<TraceSink<'_>>,
) -> Result<ReplicaResult> {
    let spec = &config.spec;
    let horizon = config.horizon;
    let mut population = Population::new(descriptor, spec, horizon, &context.bounds, seed)?;
    let mut noise = NoiseSource::new(spec, seed)?;
    let mut ledger = RegretLedger::new(config.regret_mode, &context.nash);
    let mut running = ProfileAverager::new(spec.nodes, spec.tasks);
    let mut final_window = ProfileAverager::new(spec.nodes, spec.tasks);
    let mut tail = ProfileAverager::new(spec.nodes, spec.tasks);
    let mut histogram = Histogram::new(spec.nodes * spec.tasks, config.histogram_bins, config.histogram_start() + 1);
    let gap_times = config.gap_times();
    let mut gap_trajectory = Vec::with_capacity(gap_times.len());
    let stride = config.log_stride();
    let mut regret_log = Vec::new();

    for t in 1..=horizon {
        let record = run_round(spec, &mut population, t, &mut noise)?;
        ledger.update(&record, spec)?;
        running.push(&record.x);
        if t > config.final_window_start() {
            final_window.push(&record.x);
        }
        if t > config.histogram_start() {
            tail.push(&record.x);
            histogram.push(record.x.matrix());
        }
        if gap_times.contains(&t) {
            gap_trajectory.push(GapPoint {
                t,
                gap: epsilon_gap(&running.mean()?, spec)?,
            });
        }
        if t % stride == 0 || t == horizon {
            regret_log.push(RegretPoint {
                t,
                cumulative: ledger.cumulative.iter().map(|c| c[c.len() - 1]).collect(),
            });
        }
        if let Some(s) = sink.as_mut() {
            s(&record)?;
        }
    }

    let final_cumulative: Vec<f64> = ledger.cumulative.iter().map(|c| c[c.len() - 1]).collect();
    let tf = horizon as f64;
    let total = ledger.total_cumulative();
    let (slope, slope_error) = match regret_slope(&total, (horizon / 2) as usize, horizon as usize) {
        Ok(s) => (Some(s), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(ReplicaResult {
        strategy: descriptor.strategy,
        replica,
        seed,
        final_average_regret: final_cumulative.iter().sum::<f64>() / (spec.nodes as f64 * tf),
        normalized_average_regret: normalized(&final_cumulative, &context.nash.utilities, tf),
        final_cumulative,
        regret_log,
        slope,
        slope_error,
        final_window_mean: final_window.mean()?.into_matrix(),
        tail_mean: tail.mean()?.into_matrix(),
        histogram,
        gap_trajectory,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Stat {
            mean,
            std,
            n: values.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapStat {
    pub t: u64,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub strategy: StrategyKind,
    pub seeds: usize,
    pub final_average_regret: Stat,
    pub final_cumulative_regret: Stat,
    pub normalized_average_regret: Stat,
    pub slope: Option<Stat>,
    pub slope_undefined: usize,
    pub gap_trajectory: Vec<GapStat>,
    pub final_window_mean: Matrix,
    pub tail_mean: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignMetadata {
    pub horizon: u64,
    pub seeds: Vec<u64>,
    pub master_seed: u64,
    pub regret_mode: RegretMode,
    pub noise_std: f64,
    pub noise_model: String,
    pub reward_range: (f64, f64),
    pub bounds: Bounds,
    pub log_every: u64,
    pub final_window: u64,
    pub histogram_bins: usize,
    pub histogram_from_t: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub metadata: CampaignMetadata,
    pub nash: NashSolution,
    pub summaries: Vec<StrategySummary>,
    pub replicas: Vec<ReplicaResult>,
}

impl CampaignResult {
    pub fn replicas_of(&self, strategy: StrategyKind) -> impl Iterator<Item = &ReplicaResult> {
        self.replicas.iter().filter(move |r| r.strategy == strategy)
    }

    pub fn summary(&self, strategy: StrategyKind) -> Option<&StrategySummary> {
        self.summaries.iter().find(|s| s.strategy == strategy)
    }

    /// Seed-mean cumulative regret per logged round and node.
    pub fn mean_regret_series(&self, strategy: StrategyKind) -> Vec<RegretPoint> {
        let reps: Vec<&ReplicaResult> = self.replicas_of(strategy).collect();
        let Some(first) = reps.first() else {
            return Vec::new();
        };
        let n = reps.len() as f64;
        (0..first.regret_log.len())
            .map(|i| {
                let nodes = first.regret_log[i].cumulative.len();
                RegretPoint {
                    t: first.regret_log[i].t,
                    cumulative: (0..nodes)
                        .map(|k| reps.iter().map(|r| r.regret_log[i].cumulative[k]).sum::<f64>() / n)
                        .collect(),
                }
            })
            .collect()
    }
}

fn mean_matrix<'a>(items: impl Iterator<Item = &'a Matrix>) -> Option<Matrix> {
    let mut acc: Option<Matrix> = None;
    let mut n = 0.0;
    for m in items {
        n += 1.0;
        match &mut acc {
            None => acc = Some(m.clone()),
            Some(a) => {
                for (x, y) in a.as_mut_slice().iter_mut().zip(m.iter()) {
                    *x += y;
                }
            }
        }
    }
    acc.map(|mut a| {
        for x in a.as_mut_slice() {
            *x /= n;
        }
        a
    })
}

fn summarise(strategy: StrategyKind, reps: &[&ReplicaResult]) -> Result<StrategySummary> {
    let pick = |f: &dyn Fn(&ReplicaResult) -> f64| reps.iter().map(|r| f(r)).collect::<Vec<_>>();
    let none = || Error::Degenerate(format!("no replicas for {strategy}"));
    let slopes: Vec<f64> = reps.iter().filter_map(|r| r.slope).collect();
    let gap_trajectory = reps[0]
        .gap_trajectory
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let s = Stat::of(&reps.iter().map(|r| r.gap_trajectory[i].gap).collect::<Vec<_>>()).unwrap();
            GapStat {
                t: g.t,
                mean: s.mean,
                std: s.std,
            }
        })
        .collect();
    Ok(StrategySummary {
        strategy,
        seeds: reps.len(),
        final_average_regret: Stat::of(&pick(&|r| r.final_average_regret)).ok_or_else(none)?,
        final_cumulative_regret: Stat::of(&pick(&|r| r.final_cumulative.iter().sum())).ok_or_else(none)?,
        normalized_average_regret: Stat::of(&pick(&|r| r.normalized_average_regret)).ok_or_else(none)?,
        slope: Stat::of(&slopes),
        slope_undefined: reps.len() - slopes.len(),
        gap_trajectory,
        final_window_mean: mean_matrix(reps.iter().map(|r| &r.final_window_mean)).ok_or_else(none)?,
        tail_mean: mean_matrix(reps.iter().map(|r| &r.tail_mean)).ok_or_else(none)?,
    })
}

pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignResult> {
    config.validate()?;
    let context = GameContext::new(config)?;
    run_campaign_in(config, &context)
}

/// Runs every (strategy, seed) replica in parallel against a precomputed context.
pub fn run_campaign_in(config: &CampaignConfig, context: &GameContext) -> Result<CampaignResult> {
    config.validate()?;
    let seeds = config.replica_seeds();
    let jobs: Vec<(usize, usize)> = (0..config.strategies.len())
        .flat_map(|s| (0..seeds.len()).map(move |r| (s, r)))
        .collect();
    let replicas = jobs
        .par_iter()
        .map(|&(s, r)| run_replica(config, context, &config.strategies[s], r, seeds[r], None))
        .collect::<Result<Vec<_>>>()?;
    assemble(config, context, seeds, replicas)
}

/// Like [`run_campaign`] but sequential, handing every round to a sink made by
/// `make_sink(strategy, replica)`.
pub fn run_campaign_traced(
    config: &CampaignConfig,
    mut make_sink: impl FnMut(StrategyKind, usize) -> Result<Box<dyn FnMut(&RoundRecord) -> Result<()>>>,
) -> Result<CampaignResult> {
    config.validate()?;
    let context = GameContext::new(config)?;
    let seeds = config.replica_seeds();
    let mut replicas = Vec::new();
    for d in &config.strategies {
        for (r, &seed) in seeds.iter().enumerate() {
            let mut sink = make_sink(d.strategy, r)?;
            replicas.push(run_replica(config, &context, d, r, seed, Some(&mut *sink))?);
        }
    }
    assemble(config, &context, seeds, replicas)
}

fn assemble(
    config: &CampaignConfig,
    context: &GameContext,
    seeds: Vec<u64>,
    replicas: Vec<ReplicaResult>,
) -> Result<CampaignResult> {
    let mut summaries = Vec::new();
    for d in &config.strategies {
        if summaries.iter().any(|s: &StrategySummary| s.strategy == d.strategy) {
            continue;
        }
        let reps: Vec<&ReplicaResult> = replicas.iter().filter(|r| r.strategy == d.strategy).collect();
        summaries.push(summarise(d.strategy, &reps)?);
    }
    Ok(CampaignResult {
        metadata: CampaignMetadata {
            horizon: config.horizon,
            seeds,
            master_seed: config.master_seed,
            regret_mode: config.regret_mode,
            noise_std: config.spec.noise_std,
            noise_model: "independent Gaussian per (node, task) utility term".into(),
            reward_range: context.reward_range,
            bounds: context.bounds,
            log_every: config.log_stride(),
            final_window: config.final_window.min(config.horizon),
            histogram_bins: config.histogram_bins,
            histogram_from_t: config.histogram_start() + 1,
        },
        nash: context.nash.clone(),
        summaries,
        replicas,
    })
}
