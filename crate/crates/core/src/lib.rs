//! Distributed fog task allocation as a repeated concave game with bandit
//! feedback: the game model, learning policies, a simulation engine and
//! multi-seed experiment campaigns.

pub mod dataset;
pub mod engine;
pub mod error;
pub mod game;
pub mod matrix;
pub mod optimize;
pub mod strategies;

pub use error::{Error, Result};
pub use game::{
    allocate, estimate_bounds, total_utility, utility_matrix, ActionProfile, AllocationMatrix, Bounds,
    GameSpec, SpecWarning, TaskParams,
};
pub use matrix::Matrix;
pub use strategies::{StrategyDescriptor, StrategyKind, StrategyParams};
