//! Safety gate between agents and the twin.
//!
//! Bound violations are clamped, structural ones rejected, candidates are
//! tried on a forked twin first, and sustained reward degradation after
//! actuation restores the last checkpointed configuration.

mod checkpoint;
mod envelope;
mod shadow;
mod verdict;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use checkpoint::{degradation_threshold, degraded_streak, should_rollback, Checkpoint, CheckpointLog};
pub use envelope::SafetyEnvelope;
pub use shadow::{shadow_evaluate, ShadowFailure, ShadowOutcome};
pub use verdict::{resolve_action, validate_action, Adjustment, RejectReason, Verdict};

use crate::observer::ObserverError;
use crate::twin::{TwinError, TwinState};

/// Smoothing of the reward baseline the shadow gate and checkpoints use.
pub const REWARD_EWMA_ALPHA: f64 = 0.2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SupervisorError {
    #[error("no checkpoint")]
    NoCheckpoint,
    #[error(transparent)]
    Twin(#[from] TwinError),
    #[error(transparent)]
    Observer(#[from] ObserverError),
}

/// Audit trail entry for a restored configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollbackAudit {
    pub tti: u64,
    pub checkpoint_id: u64,
    pub checkpoint_tti: u64,
    pub baseline_reward: Option<f64>,
    pub cells_restored: u32,
}

/// Re-applies the checkpoint's full configuration. Traffic, positions and
/// buffers are not rewound.
pub fn rollback(state: &mut TwinState, checkpoint: &Checkpoint) -> Result<RollbackAudit, SupervisorError> {
    state.apply_config(checkpoint.configs())?;
    Ok(RollbackAudit {
        tti: state.tti(),
        checkpoint_id: checkpoint.id(),
        checkpoint_tti: checkpoint.tti(),
        baseline_reward: checkpoint.baseline_reward(),
        cells_restored: checkpoint.configs().len() as u32,
    })
}

/// Supervisor bookkeeping owned by one control loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Supervisor {
    envelope: SafetyEnvelope,
    log: CheckpointLog,
    latest: Option<Checkpoint>,
    /// Interval rewards since the latest checkpoint or rollback.
    history: Vec<f64>,
    reward_ewma: Option<f64>,
}

impl Supervisor {
    pub fn new(envelope: SafetyEnvelope) -> Self {
        Self { envelope, log: CheckpointLog::new(), latest: None, history: Vec::new(), reward_ewma: None }
    }

    pub fn envelope(&self) -> &SafetyEnvelope {
        &self.envelope
    }

    pub fn latest_checkpoint(&self) -> Option<&Checkpoint> {
        self.latest.as_ref()
    }

    pub fn reward_ewma(&self) -> Option<f64> {
        self.reward_ewma
    }

    pub fn history(&self) -> &[f64] {
        &self.history
    }

    pub fn record_reward(&mut self, total: f64) {
        self.history.push(total);
        self.reward_ewma = Some(match self.reward_ewma {
            None => total,
            Some(m) => m + REWARD_EWMA_ALPHA * (total - m),
        });
    }

    pub fn checkpoint(&mut self, twin: &TwinState) -> &Checkpoint {
        let cp = self.log.make_checkpoint(twin.tti(), twin.cells(), self.reward_ewma);
        self.history.clear();
        self.latest.insert(cp)
    }

    /// A degradation streak against the latest checkpoint is under way.
    pub fn degrading(&self) -> bool {
        self.latest.as_ref().is_some_and(|cp| degraded_streak(&self.history, cp, &self.envelope) > 0)
    }

    pub fn should_rollback(&self) -> bool {
        self.latest.as_ref().is_some_and(|cp| should_rollback(&self.history, cp, &self.envelope))
    }

    /// Restores the latest checkpoint and starts a fresh reward history so
    /// the same streak cannot trigger twice.
    pub fn rollback(&mut self, twin: &mut TwinState) -> Result<RollbackAudit, SupervisorError> {
        let cp = self.latest.as_ref().ok_or(SupervisorError::NoCheckpoint)?;
        let audit = rollback(twin, cp)?;
        self.history.clear();
        self.reward_ewma = cp.baseline_reward().or(self.reward_ewma);
        Ok(audit)
    }
}
