use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::Bounds;

pub const DEFAULT_XI: f64 = 0.5;
pub const DEFAULT_BETA: f64 = 0.9;
pub const DEFAULT_NU: f64 = 0.1;

/// Bandit gradient ascent with momentum for one (node, task) pair.
///
/// Works in the shifted coordinate `z = x - xi`, so the action interval
/// `[0, 1]` becomes `[-xi, xi]` when `xi = 0.5`. Setting `beta = 0` gives plain
/// bandit gradient descent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BgamState {
    pub y: f64,
    pub v: f64,
    pub t: u64,
    pub sigma: f64,
    pub alpha: f64,
    pub nu: f64,
    pub beta: f64,
    pub xi: f64,
    pub last_c: Option<f64>,
}

/// Perturbation radius for horizon `horizon` with `r = R = xi`.
pub fn perturbation_radius(horizon: u64, bounds: &Bounds, xi: f64) -> f64 {
    let (l, u) = (bounds.lipschitz, bounds.utility);
    let sigma = (horizon as f64).powf(-0.25) * (xi * u * xi / (3.0 * (l * xi + u))).sqrt();
    sigma.min(0.5 * xi * (1.0 - 1e-9))
}

impl BgamState {
    pub fn configure(horizon: u64, bounds: &Bounds, xi: f64, beta: f64, nu: f64) -> Result<Self> {
        if horizon < 2 {
            return Err(Error::Config(format!("horizon must be at least 2, got {horizon}")));
        }
        bounds.validate()?;
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::Config(format!("momentum must lie in [0, 1), got {beta}")));
        }
        if !(xi > 0.0 && xi <= 0.5) {
            return Err(Error::Config(format!("shift must lie in (0, 0.5], got {xi}")));
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::Config(format!("step scale must be positive, got {nu}")));
        }
        let sigma = perturbation_radius(horizon, bounds, xi);
        Ok(BgamState {
            y: 0.0,
            v: 0.0,
            t: 1,
            sigma,
            alpha: sigma / xi,
            nu,
            beta,
            xi,
            last_c: None,
        })
    }

    /// Half-width of the shrunk interval `y` is confined to.
    pub fn radius(&self) -> f64 {
        (1.0 - self.alpha) * self.xi
    }

    pub fn act<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        let c = if rng.random::<bool>() { 1.0 } else { -1.0 };
        self.last_c = Some(c);
        (self.y + self.sigma * c + self.xi).clamp(0.0, 1.0)
    }

    pub fn update(&mut self, observed_utility: f64) -> Result<()> {
        let c = self
            .last_c
            .take()
            .ok_or_else(|| Error::Protocol("bgam update without a preceding act".into()))?;
        if !observed_utility.is_finite() {
            return Err(Error::Feedback(format!("non-finite utility {observed_utility}")));
        }
        let g = observed_utility * c;
        self.v = self.beta * self.v + g;
        let r = self.radius();
        self.y = (self.y + self.nu / (self.t as f64).sqrt() * self.v).clamp(-r, r);
        self.t += 1;
        Ok(())
    }
}
