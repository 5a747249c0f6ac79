use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::exp3::{exp3_probs_into, exp3_update, sample_arm, RewardScale};
use crate::error::{Error, Result};
use crate::game::Bounds;

pub const DEFAULT_INTERVALS: usize = 10;
pub const DEFAULT_GAMMA: f64 = 0.1;

/// Pulls per interval so that phase one covers about a tenth of the horizon.
pub fn default_pulls_per_interval(horizon: u64, intervals: usize) -> usize {
    ((0.1 * horizon as f64 / intervals as f64).ceil() as usize).max(1)
}

/// Uniform draw from the `arm`-th of `n` equal sub-intervals of `[0, 1)`.
pub fn lbwi_sample_action<R: Rng + ?Sized>(arm: usize, n: usize, rng: &mut R) -> f64 {
    let x = (arm as f64 + rng.random::<f64>()) / n as f64;
    x.min(f64::from_bits(((arm + 1) as f64 / n as f64).to_bits() - 1))
}

/// Returns `(l_hat, l_tilde)` from the phase-one mean utilities of `N` arms,
/// each pulled `pulls` times over horizon `horizon`.
pub fn lipschitz_estimate(mu_hat: &[f64], pulls: usize, horizon: u64) -> Result<(f64, f64)> {
    let n = mu_hat.len();
    if n < 2 {
        return Err(Error::Config(format!("need at least two intervals, got {n}")));
    }
    if pulls == 0 {
        return Err(Error::Config("pulls per interval must be positive".into()));
    }
    let max_diff = mu_hat
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0f64, f64::max);
    let nf = n as f64;
    let l_hat = nf * max_diff;
    let slack = nf * ((2.0 / pulls as f64) * (2.0 * nf * horizon as f64).ln()).sqrt();
    Ok((l_hat, l_hat + slack))
}

/// Phase-two interval count `N * ceil(L^(2/3) T^(1/3) / N)`.
pub fn phase2_intervals(n: usize, l_tilde: f64, horizon: u64) -> usize {
    let raw = l_tilde.powf(2.0 / 3.0) * (horizon as f64).cbrt() / n as f64;
    n * (raw.ceil() as usize).max(1)
}

/// Splits each of `N` parent weights evenly over its `N_tilde / N` children.
pub fn redistribute_weights(omega: &[f64], n_tilde: usize) -> Result<Vec<f64>> {
    let n = omega.len();
    if n == 0 || !n_tilde.is_multiple_of(n) || n_tilde == 0 {
        return Err(Error::Config(format!(
            "refined count {n_tilde} is not a positive multiple of {n}"
        )));
    }
    let share = n as f64 / n_tilde as f64;
    Ok((0..n_tilde).map(|c| share * omega[c * n / n_tilde]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Explore,
    Exploit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LbwiConfig {
    pub horizon: u64,
    pub intervals: usize,
    pub pulls_per_interval: usize,
    pub gamma: f64,
    /// Seed phase two with the phase-one weights (LBWI) or start uniform (LB).
    pub with_init: bool,
    pub reward_scale: RewardScale,
}

/// Lipschitz bandit with an optional weight hand-over between phases.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LbwiState {
    pub phase: Phase,
    pub intervals: usize,
    pub pulls_per_interval: usize,
    pub mu_hat: Vec<f64>,
    pub counts: Vec<usize>,
    pub omega_explore: Vec<f64>,
    pub gamma: f64,
    pub horizon: u64,
    pub explore_len: usize,
    pub l_hat: Option<f64>,
    pub l_tilde: Option<f64>,
    pub refined_intervals: Option<usize>,
    pub omega: Vec<f64>,
    pub last_arm: Option<usize>,
    pub last_prob: f64,
    pub with_init: bool,
    pub reward_scale: RewardScale,
    elapsed: usize,
    sweep: Vec<usize>,
    probs: Vec<f64>,
}

impl LbwiState {
    pub fn configure(cfg: LbwiConfig, bounds: Option<&Bounds>) -> Result<Self> {
        if cfg.intervals < 2 {
            return Err(Error::Config(format!(
                "need at least two intervals, got {}",
                cfg.intervals
            )));
        }
        if cfg.pulls_per_interval == 0 || cfg.horizon == 0 {
            return Err(Error::Config("horizon and pulls per interval must be positive".into()));
        }
        if !(cfg.gamma > 0.0 && cfg.gamma <= 1.0) {
            return Err(Error::Config(format!("gamma must lie in (0, 1], got {}", cfg.gamma)));
        }
        if let Some(b) = bounds {
            if (cfg.intervals as f64) < b.min_intervals() {
                log::warn!(
                    "{} intervals is below the smoothness requirement 8H/L = {:.3}",
                    cfg.intervals,
                    b.min_intervals()
                );
            }
        }
        let n = cfg.intervals;
        Ok(LbwiState {
            phase: Phase::Explore,
            intervals: n,
            pulls_per_interval: cfg.pulls_per_interval,
            mu_hat: vec![0.0; n],
            counts: vec![0; n],
            omega_explore: vec![1.0; n],
            gamma: cfg.gamma,
            horizon: cfg.horizon,
            explore_len: n * cfg.pulls_per_interval,
            l_hat: None,
            l_tilde: None,
            refined_intervals: None,
            omega: Vec::new(),
            last_arm: None,
            last_prob: 0.0,
            with_init: cfg.with_init,
            reward_scale: cfg.reward_scale,
            elapsed: 0,
            sweep: (0..n).collect(),
            probs: vec![0.0; n],
        })
    }

    /// Current sampling distribution over the active discretisation.
    pub fn probabilities(&self) -> Result<Vec<f64>> {
        let w = match self.phase {
            Phase::Explore => &self.omega_explore,
            Phase::Exploit => &self.omega,
        };
        super::exp3::exp3_probs(w, self.gamma)
    }

    pub fn act<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<f64> {
        match self.phase {
            Phase::Explore => {
                let pos = self.elapsed % self.intervals;
                if pos == 0 {
                    self.sweep.shuffle(rng);
                }
                let arm = self.sweep[pos];
                exp3_probs_into(&self.omega_explore, self.gamma, &mut self.probs)?;
                self.last_arm = Some(arm);
                self.last_prob = self.probs[arm];
                Ok(lbwi_sample_action(arm, self.intervals, rng))
            }
            Phase::Exploit => {
                exp3_probs_into(&self.omega, self.gamma, &mut self.probs)?;
                let arm = sample_arm(&self.probs, rng);
                self.last_arm = Some(arm);
                self.last_prob = self.probs[arm];
                Ok(lbwi_sample_action(arm, self.omega.len(), rng))
            }
        }
    }

    pub fn observe(&mut self, observed_utility: f64) -> Result<()> {
        let arm = self
            .last_arm
            .take()
            .ok_or_else(|| Error::Protocol("lbwi observe without a preceding act".into()))?;
        if !observed_utility.is_finite() {
            return Err(Error::Feedback(format!("non-finite utility {observed_utility}")));
        }
        let reward = self.reward_scale.normalize(observed_utility);
        match self.phase {
            Phase::Explore => {
                self.counts[arm] += 1;
                self.mu_hat[arm] += (observed_utility - self.mu_hat[arm]) / self.counts[arm] as f64;
                exp3_update(
                    &mut self.omega_explore,
                    arm,
                    reward,
                    self.last_prob,
                    self.gamma,
                    self.intervals,
                )?;
                self.elapsed += 1;
                if self.elapsed == self.explore_len {
                    self.enter_exploit()?;
                }
            }
            Phase::Exploit => {
                let count = self.omega.len();
                exp3_update(&mut self.omega, arm, reward, self.last_prob, self.gamma, count)?;
                self.elapsed += 1;
            }
        }
        Ok(())
    }

    fn enter_exploit(&mut self) -> Result<()> {
        let (l_hat, l_tilde) = lipschitz_estimate(&self.mu_hat, self.pulls_per_interval, self.horizon)?;
        let refined = phase2_intervals(self.intervals, l_tilde, self.horizon);
        self.omega = if self.with_init {
            redistribute_weights(&self.omega_explore, refined)?
        } else {
            vec![1.0; refined]
        };
        self.probs = vec![0.0; refined];
        self.l_hat = Some(l_hat);
        self.l_tilde = Some(l_tilde);
        self.refined_intervals = Some(refined);
        self.phase = Phase::Exploit;
        log::debug!("lbwi phase two: L_hat={l_hat:.4} L_tilde={l_tilde:.4} intervals={refined}");
        Ok(())
    }
}
