use serde::{Deserialize, Serialize};

use super::SafetyEnvelope;
use crate::twin::CellConfig;

/// Configuration snapshot to fall back to. Fields are private so a
/// checkpoint cannot change after it is taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    id: u64,
    tti: u64,
    configs: Vec<CellConfig>,
    baseline_reward: Option<f64>,
}

impl Checkpoint {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn tti(&self) -> u64 {
        self.tti
    }

    pub fn configs(&self) -> &[CellConfig] {
        &self.configs
    }

    /// Reward EWMA when the snapshot was taken; absent before any reward
    /// was observed, in which case degradation cannot be judged.
    pub fn baseline_reward(&self) -> Option<f64> {
        self.baseline_reward
    }
}

/// Issues checkpoints with strictly increasing ids.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckpointLog {
    next_id: u64,
}

impl CheckpointLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn make_checkpoint(&mut self, tti: u64, configs: &[CellConfig], reward_ewma: Option<f64>) -> Checkpoint {
        let id = self.next_id;
        self.next_id += 1;
        Checkpoint { id, tti, configs: configs.to_vec(), baseline_reward: reward_ewma }
    }
}

/// Level below which an interval reward counts as degraded.
pub fn degradation_threshold(baseline: f64, fraction: f64) -> f64 {
    if baseline > 0.0 {
        (1.0 - fraction) * baseline
    } else {
        baseline - fraction * baseline.abs() - 1e-6
    }
}

/// True when the last N interval rewards all sit below the threshold.
pub fn should_rollback(history: &[f64], checkpoint: &Checkpoint, envelope: &SafetyEnvelope) -> bool {
    let Some(baseline) = checkpoint.baseline_reward else { return false };
    let n = envelope.degradation_windows as usize;
    if n == 0 || history.len() < n {
        return false;
    }
    let threshold = degradation_threshold(baseline, envelope.degradation_fraction);
    history[history.len() - n..].iter().all(|&r| r < threshold)
}

/// Trailing run of degraded rewards, for deciding whether a streak is open.
pub fn degraded_streak(history: &[f64], checkpoint: &Checkpoint, envelope: &SafetyEnvelope) -> usize {
    let Some(baseline) = checkpoint.baseline_reward else { return 0 };
    let threshold = degradation_threshold(baseline, envelope.degradation_fraction);
    history.iter().rev().take_while(|&&r| r < threshold).count()
}
