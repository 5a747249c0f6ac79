//! Repeated-game simulation: round protocol, equilibrium solver, regret
//! accounting and multi-seed campaigns.

mod campaign;
mod nash;
mod regret;
mod rng;
mod round;

pub use campaign::{
    run_campaign, run_campaign_in, run_campaign_traced, run_replica, CampaignConfig, CampaignMetadata,
    CampaignResult, GameContext, GapPoint, GapStat, Histogram, RegretPoint, ReplicaResult, Stat,
    StrategySummary, TraceSink, DEFAULT_BOUNDS_GRID, DEFAULT_FINAL_WINDOW, DEFAULT_GAP_CHECKPOINTS,
    DEFAULT_HISTOGRAM_BINS, DEFAULT_HISTOGRAM_FROM,
};
pub use nash::{best_response_profile, epsilon_gap, solve_nash, solve_nash_with, NashSettings, NashSolution};
pub use regret::{
    regret_slope, slope_of_points, time_averaged_profile, update_regret, ProfileAverager, RegretLedger,
    RegretMode,
};
pub use rng::{cell_streams, derive_seed, replica_seed, stream, Purpose};
pub use round::{run_round, NoiseSource, Population, RoundRecord};
