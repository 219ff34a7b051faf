use serde::{Deserialize, Serialize};

use super::{resolve_action, SafetyEnvelope, SupervisorError};
use crate::agents::ActionSet;
use crate::observer::{aggregate, compute_reward, ObjectiveWeights};
use crate::twin::TwinState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShadowFailure {
    Coverage,
    Delay,
    Reward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowOutcome {
    /// Reward of the whole horizon aggregated as one window.
    pub predicted_reward: f64,
    /// Lowest serving RSRP seen over the horizon.
    pub min_rsrp_dbm: Option<f64>,
    pub p95_delay_ms: f64,
    pub failure: Option<ShadowFailure>,
}

impl ShadowOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

fn min_serving_rsrp(twin: &TwinState) -> f64 {
    (0..twin.ues().len() as u32)
        .map(|u| twin.serving_rsrp(u).unwrap_or(f64::NEG_INFINITY))
        .fold(f64::INFINITY, f64::min)
}

/// Runs `action` on a fork of `live` for the shadow horizon and judges it.
///
/// Checks, first failure wins:
/// * coverage: right after actuation every UE must have serving RSRP at or
///   above the floor, unless the action leaves the worst UE no worse off
///   than it already was;
/// * delay: predicted p95 above the MAD fails, unless an untouched fork
///   over the same horizon is at least as late;
/// * reward: predicted reward below `reward_baseline − ε` fails. Skipped
///   while no baseline exists.
///
/// Forks share the live random streams, so an empty action reproduces the
/// live trajectory exactly.
pub fn shadow_evaluate(
    live: &TwinState,
    action: &ActionSet,
    envelope: &SafetyEnvelope,
    weights: &ObjectiveWeights,
    reward_baseline: Option<f64>,
) -> Result<ShadowOutcome, SupervisorError> {
    let updates = resolve_action(envelope, live.cells(), action);
    let mut fork = live.fork();
    fork.apply_config(&updates)?;
    let before = min_serving_rsrp(live);
    let after = min_serving_rsrp(&fork);
    let coverage_broken = after < envelope.min_coverage_rsrp_dbm && after < before;

    let stats = fork.advance(envelope.shadow_horizon_ttis);
    let report = aggregate(&stats)?;
    let reward = compute_reward(&report, weights).total;
    let p95 = report.network.p95_delay_ms;

    let failure = if coverage_broken {
        Some(ShadowFailure::Coverage)
    } else if p95 > envelope.mad_ms && p95 > untouched_p95(live, envelope)? {
        Some(ShadowFailure::Delay)
    } else if reward_baseline.is_some_and(|b| reward < b - envelope.shadow_tolerance) {
        Some(ShadowFailure::Reward)
    } else {
        None
    };
    Ok(ShadowOutcome { predicted_reward: reward, min_rsrp_dbm: report.network.min_ue_rsrp_dbm, p95_delay_ms: p95, failure })
}

fn untouched_p95(live: &TwinState, envelope: &SafetyEnvelope) -> Result<f64, SupervisorError> {
    let mut fork = live.fork();
    let stats = fork.advance(envelope.shadow_horizon_ttis);
    Ok(aggregate(&stats)?.network.p95_delay_ms)
}
