use std::fs;
use std::path::{Path, PathBuf};

use fogalloc_core::dataset::{builtin_game1, bundled_dataset, load_dataset, select_subgame, IndexDataset};
use fogalloc_core::engine::{CampaignConfig, RegretMode};
use fogalloc_core::{Error, GameSpec, Result, StrategyDescriptor};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinGame {
    /// Two nodes, two tasks.
    Game1,
    /// The bundled ten-node, ten-task dataset.
    Dataset,
}

/// Where the game comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpecSource {
    Inline {
        spec: GameSpec,
    },
    Builtin {
        name: BuiltinGame,
    },
    /// A dataset file (or the bundled one when `path` is absent) restricted to
    /// the listed node rows and task columns.
    Dataset {
        #[serde(default)]
        path: Option<PathBuf>,
        #[serde(default)]
        nodes: Option<Vec<usize>>,
        #[serde(default)]
        tasks: Option<Vec<usize>>,
    },
}

impl SpecSource {
    pub fn resolve(&self) -> Result<GameSpec> {
        match self {
            SpecSource::Inline { spec } => {
                spec.validate()?;
                Ok(spec.clone())
            }
            SpecSource::Builtin { name: BuiltinGame::Game1 } => Ok(builtin_game1()),
            SpecSource::Builtin { name: BuiltinGame::Dataset } => bundled_dataset().to_spec(),
            SpecSource::Dataset { path, nodes, tasks } => {
                let data: IndexDataset = match path {
                    Some(p) => load_dataset(p)?,
                    None => bundled_dataset(),
                };
                let nodes = nodes.clone().unwrap_or_else(|| (0..data.nodes()).collect());
                let tasks = tasks.clone().unwrap_or_else(|| (0..data.tasks()).collect());
                select_subgame(&data, &nodes, &tasks)
            }
        }
    }
}

/// A complete experiment description, loadable from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub spec_source: SpecSource,
    pub strategies: Vec<StrategyDescriptor>,
    #[serde(rename = "T")]
    pub horizon: u64,
    pub n_seeds: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub regret_mode: RegretMode,
    #[serde(default)]
    pub trace_opt_in: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_std: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_every: Option<u64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("T must be at least 1".into()));
        }
        if self.n_seeds == 0 {
            return Err(Error::Config("n_seeds must be at least 1".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("no strategies requested".into()));
        }
        if let Some(s) = self.noise_std {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::Config(format!("noise_std must be non-negative, got {s}")));
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<GameSpec> {
        let spec = self.spec_source.resolve()?;
        Ok(match self.noise_std {
            Some(s) => spec.with_noise_std(s),
            None => spec,
        })
    }

    pub fn campaign(&self) -> Result<CampaignConfig> {
        self.validate()?;
        let mut c = CampaignConfig::new(
            self.spec()?,
            self.strategies.clone(),
            self.horizon,
            self.n_seeds,
            self.master_seed,
        );
        c.regret_mode = self.regret_mode;
        c.log_every = self.log_every;
        c.validate()?;
        Ok(c)
    }
}
