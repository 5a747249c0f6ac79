//! Decision policies. Bandit learners (`bgam`, `bgd`, `lbwi`, `lb`, `rs`) run
//! one independent instance per (node, task) pair and only ever see their own
//! scalar feedback. `gp` and `br` are full-information baselines and `llr`
//! is a centralised matcher.

mod best_response;
mod bgam;
mod exp3;
mod gp;
mod hungarian;
mod lbwi;
mod llr;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use best_response::{best_response, task_best_response, BR_TOLERANCE};
pub use bgam::{perturbation_radius, BgamState, DEFAULT_BETA, DEFAULT_NU, DEFAULT_XI};
pub use exp3::{exp3_probs, exp3_probs_into, exp3_update, sample_arm, RewardScale};
pub use gp::{GpState, DEFAULT_ETA, DEFAULT_START};
pub use hungarian::{assignment_value, hungarian_match, Assignment};
pub use lbwi::{
    default_pulls_per_interval, lbwi_sample_action, lipschitz_estimate, phase2_intervals,
    redistribute_weights, LbwiConfig, LbwiState, Phase, DEFAULT_GAMMA, DEFAULT_INTERVALS,
};
pub use llr::{assignment_actions, ucb_weights, LlrState};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Bgam,
    Bgd,
    Lbwi,
    Lb,
    Llr,
    Gp,
    Br,
    Rs,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 8] = [
        StrategyKind::Bgam,
        StrategyKind::Bgd,
        StrategyKind::Lbwi,
        StrategyKind::Lb,
        StrategyKind::Llr,
        StrategyKind::Gp,
        StrategyKind::Br,
        StrategyKind::Rs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Bgam => "bgam",
            StrategyKind::Bgd => "bgd",
            StrategyKind::Lbwi => "lbwi",
            StrategyKind::Lb => "lb",
            StrategyKind::Llr => "llr",
            StrategyKind::Gp => "gp",
            StrategyKind::Br => "br",
            StrategyKind::Rs => "rs",
        }
    }

    /// True when the policy learns from its own scalar feedback only.
    pub fn is_bandit(self) -> bool {
        matches!(
            self,
            StrategyKind::Bgam | StrategyKind::Bgd | StrategyKind::Lbwi | StrategyKind::Lb | StrategyKind::Rs
        )
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown strategy '{s}'")))
    }
}

/// Optional hyperparameters; absent fields take the policy defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulls_per_interval: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyDescriptor {
    pub strategy: StrategyKind,
    #[serde(default)]
    pub params: StrategyParams,
}

/// Fully defaulted hyperparameters for one policy at a given horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedParams {
    pub xi: f64,
    pub beta: f64,
    pub nu: f64,
    pub intervals: usize,
    pub pulls_per_interval: usize,
    pub gamma: f64,
    pub eta: f64,
    pub start: f64,
}

impl StrategyDescriptor {
    pub fn new(strategy: StrategyKind) -> Self {
        StrategyDescriptor {
            strategy,
            params: StrategyParams::default(),
        }
    }

    pub fn resolve(&self, horizon: u64) -> Result<ResolvedParams> {
        let p = &self.params;
        let beta = match self.strategy {
            StrategyKind::Bgd => {
                if p.beta.is_some_and(|b| b != 0.0) {
                    return Err(Error::Config("bgd has no momentum; drop the beta parameter".into()));
                }
                0.0
            }
            _ => p.beta.unwrap_or(DEFAULT_BETA),
        };
        let intervals = p.intervals.unwrap_or(DEFAULT_INTERVALS);
        if intervals == 0 {
            return Err(Error::Config("intervals must be positive".into()));
        }
        Ok(ResolvedParams {
            xi: p.xi.unwrap_or(DEFAULT_XI),
            beta,
            nu: p.nu.unwrap_or(DEFAULT_NU),
            intervals,
            pulls_per_interval: p
                .pulls_per_interval
                .unwrap_or_else(|| default_pulls_per_interval(horizon, intervals)),
            gamma: p.gamma.unwrap_or(DEFAULT_GAMMA),
            eta: p.eta.unwrap_or(DEFAULT_ETA),
            start: p.start.unwrap_or(DEFAULT_START),
        })
    }
}
