use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::nash::NashSolution;
use super::round::RoundRecord;
use crate::error::{Error, Result};
use crate::game::{total_utility, ActionProfile, GameSpec};
use crate::matrix::Matrix;
use crate::strategies::best_response;

/// What a node's realised utility is compared against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegretMode {
    /// The node's utility at the equilibrium.
    #[default]
    NeReference,
    /// The node's best reply to the others' actions of the same round.
    PerRoundBr,
}

impl fmt::Display for RegretMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegretMode::NeReference => "ne_reference",
            RegretMode::PerRoundBr => "per_round_br",
        })
    }
}

impl FromStr for RegretMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ne_reference" => Ok(RegretMode::NeReference),
            "per_round_br" => Ok(RegretMode::PerRoundBr),
            other => Err(Error::Config(format!("unknown regret mode '{other}'"))),
        }
    }
}

/// Per-node regret series measured on noise-free utilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretLedger {
    pub mode: RegretMode,
    pub reference: Vec<f64>,
    /// `instantaneous[k][t - 1]`
    pub instantaneous: Vec<Vec<f64>>,
    /// `cumulative[k][t - 1]`, the running sum of `instantaneous[k]`.
    pub cumulative: Vec<Vec<f64>>,
}

impl RegretLedger {
    pub fn new(mode: RegretMode, nash: &NashSolution) -> Self {
        let nodes = nash.utilities.len();
        RegretLedger {
            mode,
            reference: nash.utilities.clone(),
            instantaneous: vec![Vec::new(); nodes],
            cumulative: vec![Vec::new(); nodes],
        }
    }

    pub fn nodes(&self) -> usize {
        self.reference.len()
    }

    pub fn rounds(&self) -> usize {
        self.cumulative.first().map_or(0, Vec::len)
    }

    pub fn update(&mut self, record: &RoundRecord, spec: &GameSpec) -> Result<()> {
        record.clean_utility.ensure_shape(self.nodes(), spec.tasks)?;
        for k in 0..self.nodes() {
            let realised: f64 = record.clean_utility.row(k).iter().sum();
            let target = match self.mode {
                RegretMode::NeReference => self.reference[k],
                RegretMode::PerRoundBr => best_reply_utility(k, &record.x, spec)?.max(realised),
            };
            let r = target - realised;
            let prev = self.cumulative[k].last().copied().unwrap_or(0.0);
            self.instantaneous[k].push(r);
            self.cumulative[k].push(prev + r);
        }
        Ok(())
    }

    /// Sum over nodes of the cumulative regret after each round.
    pub fn total_cumulative(&self) -> Vec<f64> {
        (0..self.rounds())
            .map(|i| self.cumulative.iter().map(|c| c[i]).sum())
            .collect()
    }
}

pub fn update_regret(ledger: &mut RegretLedger, record: &RoundRecord, spec: &GameSpec) -> Result<()> {
    ledger.update(record, spec)
}

fn best_reply_utility(node: usize, x: &ActionProfile, spec: &GameSpec) -> Result<f64> {
    let mut dev = x.clone();
    dev.set_row(node, &best_response(node, x, spec)?);
    total_utility(node, &dev, spec)
}

/// Running entrywise mean of action profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileAverager {
    sum: Matrix,
    count: u64,
}

impl ProfileAverager {
    pub fn new(nodes: usize, tasks: usize) -> Self {
        ProfileAverager {
            sum: Matrix::zeros(nodes, tasks),
            count: 0,
        }
    }

    pub fn push(&mut self, x: &ActionProfile) {
        for (s, v) in self.sum.as_mut_slice().iter_mut().zip(x.matrix().iter()) {
            *s += v;
        }
        self.count += 1;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> Result<ActionProfile> {
        if self.count == 0 {
            return Err(Error::Degenerate("average over zero rounds".into()));
        }
        let n = self.count as f64;
        let m = Matrix::from_fn(self.sum.rows(), self.sum.cols(), |k, j| (self.sum.get(k, j) / n).clamp(0.0, 1.0));
        ActionProfile::new(m)
    }
}

/// Entrywise mean of the actions in `records`.
pub fn time_averaged_profile(records: &[RoundRecord]) -> Result<ActionProfile> {
    let first = records
        .first()
        .ok_or_else(|| Error::Degenerate("average over zero rounds".into()))?;
    let mut avg = ProfileAverager::new(first.x.nodes(), first.x.tasks());
    for r in records {
        avg.push(&r.x);
    }
    avg.mean()
}

/// Least-squares slope of `ln R(t)` against `ln t` over `t` in `[from, to]`,
/// where `cumulative[t - 1] = R(t)`.
pub fn regret_slope(cumulative: &[f64], from: usize, to: usize) -> Result<f64> {
    let from = from.max(1);
    if to > cumulative.len() || from >= to {
        return Err(Error::UndefinedSlope(format!(
            "window [{from}, {to}] does not fit a series of length {}",
            cumulative.len()
        )));
    }
    let points: Vec<(f64, f64)> = (from..=to).map(|t| (t as f64, cumulative[t - 1])).collect();
    slope_of_points(&points)
}

/// Log-log least-squares slope of `(t, value)` pairs.
pub fn slope_of_points(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::UndefinedSlope("need at least two points".into()));
    }
    if let Some((t, v)) = points.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(Error::UndefinedSlope(format!("regret {v} at t = {t} is not positive")));
    }
    let n = points.len() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for (t, v) in points {
        sx += t.ln();
        sy += v.ln();
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, v) in points {
        let dx = t.ln() - mx;
        sxy += dx * (v.ln() - my);
        sxx += dx * dx;
    }
    if sxx == 0.0 {
        return Err(Error::UndefinedSlope("window has a single abscissa".into()));
    }
    Ok(sxy / sxx)
}
