//! Telemetry aggregation and the signals derived from it.

mod anomaly;
mod discretize;
mod fairness;
mod forecast;
mod report;
mod reward;

use thiserror::Error;

pub use anomaly::{AnomalyReport, AnomalyTracker, DEFAULT_ANOMALY_ALPHA, DEFAULT_WARMUP, DEFAULT_Z_THRESHOLD};
pub use discretize::{
    discretize_state, interference_level, load_level, CellState, DiscreteState, INTERFERENCE_LEVELS, LOAD_LEVELS,
};
pub use fairness::jain_index;
pub use forecast::{forecast_load, forecast_with, HOLT_ALPHA, HOLT_BETA};
pub use report::{aggregate, percentile_nearest_rank, CellReport, NetworkReport, TelemetryReport, Window};
pub use reward::{compute_reward, ObjectiveWeights, RewardComponents, RewardSignal, TERM_CAP};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObserverError {
    #[error("empty window")]
    EmptyWindow,
    #[error("undefined fairness: {0}")]
    UndefinedFairness(&'static str),
    #[error("insufficient history: need at least 2 samples, got {0}")]
    InsufficientHistory(usize),
}
