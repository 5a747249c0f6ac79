use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rng::{stream, Purpose};
use crate::error::{Error, Result};
use crate::game::{total_utility, ActionProfile, GameSpec};
use crate::matrix::Matrix;
use crate::strategies::best_response;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NashSettings {
    pub tol: f64,
    pub max_sweeps: usize,
    pub n_starts: usize,
    pub seed: u64,
}

impl Default for NashSettings {
    fn default() -> Self {
        NashSettings {
            tol: 1e-6,
            max_sweeps: 10_000,
            n_starts: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NashSolution {
    pub x_star: ActionProfile,
    pub utilities: Vec<f64>,
    pub eps_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Every node's best reply to `x`, computed against the same profile.
pub fn best_response_profile(x: &ActionProfile, spec: &GameSpec) -> Result<ActionProfile> {
    let mut next = Matrix::zeros(spec.nodes, spec.tasks);
    for k in 0..spec.nodes {
        next.row_mut(k).copy_from_slice(&best_response(k, x, spec)?);
    }
    ActionProfile::new(next)
}

/// Largest unilateral gain any node can obtain from `x`.
pub fn epsilon_gap(x: &ActionProfile, spec: &GameSpec) -> Result<f64> {
    let mut gap = 0.0f64;
    for k in 0..spec.nodes {
        let mut deviated = x.clone();
        deviated.set_row(k, &best_response(k, x, spec)?);
        gap = gap.max(total_utility(k, &deviated, spec)? - total_utility(k, x, spec)?);
    }
    Ok(gap)
}

/// Relaxed synchronous best-response iteration from one start.
///
/// Full steps are taken while the residual shrinks; whenever it stalls the
/// step is halved (down to 1/64), which breaks the two-cycles that pure
/// synchronous sweeps fall into on larger games. Stops once every row is
/// within `tol` of its own best reply.
fn iterate(start: ActionProfile, spec: &GameSpec, tol: f64, max_sweeps: usize) -> Result<(ActionProfile, usize, bool)> {
    let mut x = start;
    let mut step = 1.0f64;
    let mut prev = f64::INFINITY;
    for sweep in 1..=max_sweeps {
        let br = best_response_profile(&x, spec)?;
        let residual = br.max_abs_diff(&x);
        if residual < tol {
            return Ok((br, sweep, true));
        }
        if residual > 0.999 * prev {
            step = (0.5 * step).max(1.0 / 64.0);
        }
        prev = residual;
        let moved = Matrix::from_fn(spec.nodes, spec.tasks, |k, m| {
            let (a, b) = (x.get(k, m), br.get(k, m));
            (a + step * (b - a)).clamp(0.0, 1.0)
        });
        x = ActionProfile::new(moved)?;
    }
    Ok((x, max_sweeps, false))
}

pub fn solve_nash(spec: &GameSpec, tol: f64, max_sweeps: usize, n_starts: usize) -> Result<NashSolution> {
    solve_nash_with(
        spec,
        &NashSettings {
            tol,
            max_sweeps,
            n_starts,
            ..NashSettings::default()
        },
    )
}

/// Best-response dynamics from several random starts. All starts must land
/// within `10 tol` of each other, which certifies a single equilibrium.
pub fn solve_nash_with(spec: &GameSpec, settings: &NashSettings) -> Result<NashSolution> {
    if !(settings.tol > 0.0) || settings.n_starts == 0 || settings.max_sweeps == 0 {
        return Err(Error::Config("solver needs tol > 0, at least one start and one sweep".into()));
    }
    let mut rng = stream(settings.seed, Purpose::Solver, &[]);
    let mut runs = Vec::with_capacity(settings.n_starts);
    for _ in 0..settings.n_starts {
        let start = Matrix::from_fn(spec.nodes, spec.tasks, |_, _| rng.random::<f64>());
        runs.push(iterate(ActionProfile::new(start)?, spec, settings.tol, settings.max_sweeps)?);
    }
    let reference = runs[0].0.clone();
    let spread = runs
        .iter()
        .map(|(x, _, _)| x.max_abs_diff(&reference))
        .fold(0.0f64, f64::max);
    let limit = 10.0 * settings.tol;
    if spread > limit {
        return Err(Error::UniquenessViolation { spread, limit });
    }
    let iterations = runs.iter().map(|r| r.1).max().unwrap_or(0);
    let converged = runs.iter().all(|r| r.2);
    if !converged {
        log::warn!("best-response iteration hit {} sweeps without converging", settings.max_sweeps);
    }
    let utilities = (0..spec.nodes)
        .map(|k| total_utility(k, &reference, spec))
        .collect::<Result<Vec<_>>>()?;
    Ok(NashSolution {
        eps_gap: epsilon_gap(&reference, spec)?,
        x_star: reference,
        utilities,
        iterations,
        converged,
    })
}
