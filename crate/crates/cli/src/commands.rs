use std::cell::RefCell;
use std::fs;
use std::path::{Path, PathBuf};
use std::rc::Rc;

use clap::{Args, Parser, Subcommand};
use fogalloc_core::engine::{
    run_campaign, run_campaign_traced, slope_of_points, solve_nash_with, CampaignResult, NashSettings,
    RegretMode,
};
use fogalloc_core::{Error, GameSpec, Result, StrategyDescriptor, StrategyKind};
use serde_json::json;

use crate::config::{BuiltinGame, ExperimentConfig, SpecSource};
use crate::output::{summary_json, write_final_actions_csv, write_histogram_csv, write_regret_csv, TraceWriter};

#[derive(Debug, Parser)]
#[command(name = "fogalloc", version, about = "Fog task-allocation learning experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a multi-seed campaign and write result files.
    Run(RunArgs),
    /// Solve for the equilibrium of a game and print it as JSON.
    SolveNash(SolveArgs),
    /// Check a game description and print any warnings.
    ValidateSpec(GameArgs),
    /// Fit log-log regret slopes, from a regret CSV or a fresh campaign.
    BenchSlope(SlopeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GameArgs {
    /// Built-in game to use.
    #[arg(long, value_enum)]
    pub game: Option<BuiltinGame>,
    /// Dataset file or directory; implies `--game dataset`.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// JSON game description.
    #[arg(long, conflicts_with_all = ["game", "dataset"])]
    pub spec: Option<PathBuf>,
    /// Use the first n nodes of a dataset.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Use the first n tasks of a dataset.
    #[arg(long)]
    pub tasks: Option<usize>,
    #[arg(long = "noise-std")]
    pub noise_std: Option<f64>,
}

impl GameArgs {
    fn source(&self) -> Result<SpecSource> {
        if let Some(path) = &self.spec {
            return Ok(SpecSource::Inline {
                spec: GameSpec::from_json(&fs::read_to_string(path)?)?,
            });
        }
        let dataset = self.dataset.is_some() || self.game == Some(BuiltinGame::Dataset);
        if !dataset {
            if self.nodes.is_some() || self.tasks.is_some() {
                return Err(Error::Config("--nodes/--tasks apply to dataset games only".into()));
            }
            return Ok(SpecSource::Builtin {
                name: BuiltinGame::Game1,
            });
        }
        Ok(SpecSource::Dataset {
            path: self.dataset.clone(),
            nodes: self.nodes.map(|n| (0..n).collect()),
            tasks: self.tasks.map(|n| (0..n).collect()),
        })
    }

    pub fn spec(&self) -> Result<GameSpec> {
        let spec = self.source()?.resolve()?;
        Ok(match self.noise_std {
            Some(s) => spec.with_noise_std(s),
            None => spec,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Experiment JSON; command-line flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub game: GameArgs,
    /// Comma-separated strategy names.
    #[arg(long, value_delimiter = ',')]
    pub strategy: Vec<StrategyKind>,
    #[arg(long = "T")]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long = "master-seed")]
    pub master_seed: Option<u64>,
    #[arg(long = "regret-mode")]
    pub regret_mode: Option<RegretMode>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write per-round trace CSVs (large).
    #[arg(long)]
    pub trace: bool,
    /// Stride of the logged regret series.
    #[arg(long = "log-every")]
    pub log_every: Option<u64>,
}

impl RunArgs {
    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let game_flags = self.game.game.is_some() || self.game.dataset.is_some() || self.game.spec.is_some();
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig {
                spec_source: self.game.source()?,
                strategies: vec![StrategyDescriptor::new(StrategyKind::Bgam)],
                horizon: 50_000,
                n_seeds: 10,
                master_seed: 0,
                output_dir: PathBuf::from("out"),
                regret_mode: RegretMode::default(),
                trace_opt_in: false,
                noise_std: None,
                log_every: None,
            },
        };
        if self.config.is_some() && game_flags {
            cfg.spec_source = self.game.source()?;
        }
        if !self.strategy.is_empty() {
            cfg.strategies = self.strategy.iter().map(|k| StrategyDescriptor::new(*k)).collect();
        }
        if let Some(v) = self.horizon {
            cfg.horizon = v;
        }
        if let Some(v) = self.seeds {
            cfg.n_seeds = v;
        }
        if let Some(v) = self.master_seed {
            cfg.master_seed = v;
        }
        if let Some(v) = self.regret_mode {
            cfg.regret_mode = v;
        }
        if let Some(v) = &self.out {
            cfg.output_dir = v.clone();
        }
        if self.game.noise_std.is_some() {
            cfg.noise_std = self.game.noise_std;
        }
        if self.log_every.is_some() {
            cfg.log_every = self.log_every;
        }
        cfg.trace_opt_in |= self.trace;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long = "max-sweeps", default_value_t = 10_000)]
    pub max_sweeps: usize,
    #[arg(long, default_value_t = 20)]
    pub starts: usize,
    #[arg(long = "master-seed", default_value_t = 0)]
    pub master_seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SlopeArgs {
    /// Regret CSV to fit; when absent a campaign is run with the flags below.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
}

/// Executes one command, returning the text to print on success.
pub fn run_cli(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Run(args) => run(&args.experiment()?),
        Command::SolveNash(args) => {
            let spec = args.game.spec()?;
            let settings = NashSettings {
                tol: args.tol,
                max_sweeps: args.max_sweeps,
                n_starts: args.starts,
                seed: args.master_seed,
            };
            Ok(serde_json::to_string_pretty(&solve_nash_with(&spec, &settings)?)?)
        }
        Command::ValidateSpec(args) => {
            let spec = args.spec()?;
            let warnings: Vec<String> = spec.validate()?.iter().map(|w| w.to_string()).collect();
            Ok(serde_json::to_string_pretty(&json!({
                "valid": true,
                "K": spec.nodes,
                "M": spec.tasks,
                "warnings": warnings,
            }))?)
        }
        Command::BenchSlope(args) => match &args.input {
            Some(path) => Ok(serde_json::to_string_pretty(&slope_from_csv(path)?)?),
            None => {
                let cfg = args.run.experiment()?;
                let result = run_campaign(&cfg.campaign()?)?;
                let rows: Vec<_> = result
                    .summaries
                    .iter()
                    .map(|s| {
                        json!({
                            "strategy": s.strategy,
                            "slope": s.slope,
                            "slope_undefined": s.slope_undefined,
                            "seeds": s.seeds,
                        })
                    })
                    .collect();
                Ok(serde_json::to_string_pretty(&rows)?)
            }
        },
    }
}

/// Writes every result file of a campaign into the configured directory.
pub fn run(cfg: &ExperimentConfig) -> Result<String> {
    let campaign = cfg.campaign()?;
    let out = &cfg.output_dir;
    fs::create_dir_all(out)?;
    let result = if cfg.trace_opt_in {
        let writers: Rc<RefCell<Vec<Rc<RefCell<TraceWriter>>>>> = Rc::default();
        let handle = writers.clone();
        let result = run_campaign_traced(&campaign, |kind, replica| {
            let w = Rc::new(RefCell::new(TraceWriter::create(
                &out.join(format!("trace_{}_seed{replica}.csv", kind.name())),
            )?));
            handle.borrow_mut().push(w.clone());
            Ok(Box::new(move |r| w.borrow_mut().write(r)))
        })?;
        for w in writers.borrow().iter() {
            w.borrow_mut().flush()?;
        }
        result
    } else {
        run_campaign(&campaign)?
    };
    write_outputs(out, cfg, &result)?;
    let mut lines = vec![format!("wrote results to {}", out.display())];
    for s in &result.summaries {
        lines.push(format!(
            "{:<5} final average regret {:.6} (std {:.6}) over {} seeds",
            s.strategy.name(),
            s.final_average_regret.mean,
            s.final_average_regret.std,
            s.seeds
        ));
    }
    Ok(lines.join("\n"))
}

pub fn write_outputs(out: &Path, cfg: &ExperimentConfig, result: &CampaignResult) -> Result<()> {
    let tasks = result
        .nash
        .x_star
        .tasks();
    for s in &result.summaries {
        let name = s.strategy.name();
        write_regret_csv(&out.join(format!("regret_{name}.csv")), &result.mean_regret_series(s.strategy))?;
        write_histogram_csv(&out.join(format!("histogram_{name}.csv")), tasks, result.replicas_of(s.strategy))?;
        write_final_actions_csv(&out.join(format!("final_actions_{name}.csv")), result, s.strategy)?;
    }
    fs::write(out.join("summary.json"), summary_json(result)?)?;
    fs::write(out.join("config.json"), serde_json::to_string_pretty(cfg)?)?;
    Ok(())
}

/// Slope of the node-summed cumulative regret over `[T/2, T]` of a regret CSV.
pub fn slope_from_csv(path: &Path) -> Result<serde_json::Value> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("{} has no '{name}' column", path.display())))
    };
    let (t_col, r_col) = (col("t")?, col("cumulative_regret")?);
    let mut totals: Vec<(f64, f64)> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let parse = |j: usize| -> Result<f64> {
            rec.get(j).and_then(|s| s.parse().ok()).ok_or_else(|| Error::Ingestion {
                row: i + 2,
                col: j + 1,
                msg: "expected a number".into(),
            })
        };
        let (t, r) = (parse(t_col)?, parse(r_col)?);
        match totals.last_mut() {
            Some(last) if last.0 == t => last.1 += r,
            _ => totals.push((t, r)),
        }
    }
    let horizon = totals.last().map_or(0.0, |p| p.0);
    let window: Vec<(f64, f64)> = totals.into_iter().filter(|p| p.0 >= horizon / 2.0).collect();
    let slope = slope_of_points(&window)?;
    Ok(json!({ "input": path.display().to_string(), "T": horizon, "points": window.len(), "slope": slope }))
}
