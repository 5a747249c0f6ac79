use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ETA: f64 = 0.5;
pub const DEFAULT_START: f64 = 0.5;

/// Projected gradient play on one (node, task) pair with step `eta / sqrt(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpState {
    pub x: f64,
    pub eta: f64,
    pub t: u64,
}

impl GpState {
    pub fn new(x: f64, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Config(format!("initial action {x} outside [0, 1]")));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Config(format!("step scale must be positive, got {eta}")));
        }
        Ok(GpState { x, eta, t: 1 })
    }

    pub fn act(&self) -> f64 {
        self.x
    }

    /// Applies one projected ascent step and returns the new action.
    pub fn step(&mut self, gradient: f64) -> f64 {
        self.x = (self.x + self.eta / (self.t as f64).sqrt() * gradient).clamp(0.0, 1.0);
        self.t += 1;
        self.x
    }
}
