use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// EXP3 sampling distribution: `(1 - gamma) w / sum(w) + gamma / n`.
pub fn exp3_probs(weights: &[f64], gamma: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; weights.len()];
    exp3_probs_into(weights, gamma, &mut out)?;
    Ok(out)
}

pub fn exp3_probs_into(weights: &[f64], gamma: f64, out: &mut [f64]) -> Result<()> {
    if weights.is_empty() || out.len() != weights.len() {
        return Err(Error::Numeric("weights and output must be non-empty and equally long".into()));
    }
    let mut total = 0.0;
    for &w in weights {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::Numeric(format!("EXP3 weight must be positive and finite, got {w}")));
        }
        total += w;
    }
    let floor = gamma / weights.len() as f64;
    for (p, &w) in out.iter_mut().zip(weights) {
        *p = (1.0 - gamma) * w / total + floor;
    }
    Ok(())
}

/// Multiplies the played arm's weight by `exp(gamma r / (count p))`, then
/// rescales every weight by the largest one.
pub fn exp3_update(
    weights: &mut [f64],
    arm: usize,
    reward: f64,
    prob: f64,
    gamma: f64,
    count: usize,
) -> Result<()> {
    if arm >= weights.len() {
        return Err(Error::Index {
            index: arm,
            len: weights.len(),
        });
    }
    if !(prob > 0.0) {
        return Err(Error::Protocol(format!("EXP3 update with probability {prob}")));
    }
    weights[arm] *= (gamma * reward / (count as f64 * prob)).exp();
    let max = weights.iter().copied().fold(0.0f64, f64::max);
    if !(max > 0.0 && max.is_finite()) {
        return Err(Error::Numeric(format!("EXP3 weights degenerated (max {max})")));
    }
    for w in weights.iter_mut() {
        *w /= max;
    }
    Ok(())
}

/// Draws an index from a probability vector by inversion.
pub fn sample_arm<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let target: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if target < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Fixed affine map from raw utilities onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardScale {
    pub lo: f64,
    pub hi: f64,
}

impl RewardScale {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo && lo.is_finite() && hi.is_finite()) {
            return Err(Error::Config(format!("invalid reward range [{lo}, {hi}]")));
        }
        Ok(RewardScale { lo, hi })
    }

    pub fn normalize(&self, u: f64) -> f64 {
        ((u - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }
}
