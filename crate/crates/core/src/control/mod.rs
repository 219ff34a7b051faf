//! The closed loop: observe, reward, learn, propose, supervise, actuate,
//! checkpoint or roll back, record. One [`Episode`] owns every piece of
//! mutable state, so a serialized episode resumes exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{ActionSet, Agent, AgentDiagnostics, AgentError, AgentKind};
use crate::observer::{
    aggregate, compute_reward, forecast_load, AnomalyReport, AnomalyTracker, ObjectiveWeights, ObserverError,
    RewardSignal, TelemetryReport,
};
use crate::supervisor::{
    resolve_action, shadow_evaluate, validate_action, RollbackAudit, SafetyEnvelope, ShadowOutcome, Supervisor,
    SupervisorError, Verdict,
};
use crate::twin::{TwinError, TwinSetup, TwinState};

pub const DEFAULT_DECISION_INTERVAL: u64 = 200;
pub const DEFAULT_CHECKPOINT_INTERVAL: u64 = 10;
/// Fraction of the episode's decisions over which exploration anneals.
pub const ANNEAL_FRACTION: f64 = 0.75;
/// Interval loads kept for forecasting.
const LOAD_HISTORY: usize = 64;
const ANOMALY_METRICS: [&str; 3] = ["throughput_bps", "p95_delay_ms", "reward"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("invalid loop config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Twin(#[from] TwinError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Supervisor(#[from] SupervisorError),
    #[error(transparent)]
    Observer(#[from] ObserverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopConfig {
    /// TTIs per decision; also the telemetry window.
    pub decision_interval: u64,
    /// Decision intervals between checkpoints.
    pub checkpoint_interval: u64,
    pub total_ttis: u64,
    pub agent: AgentKind,
    pub shadow_enabled: bool,
}

impl LoopConfig {
    pub fn new(total_ttis: u64, agent: AgentKind) -> Self {
        Self {
            decision_interval: DEFAULT_DECISION_INTERVAL,
            checkpoint_interval: DEFAULT_CHECKPOINT_INTERVAL,
            total_ttis,
            agent,
            shadow_enabled: true,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.decision_interval == 0 {
            return Err("decision_interval must be at least 1".into());
        }
        if self.checkpoint_interval == 0 {
            return Err("checkpoint_interval must be at least 1".into());
        }
        if self.total_ttis < self.decision_interval {
            return Err(format!(
                "total_ttis {} shorter than decision_interval {}",
                self.total_ttis, self.decision_interval
            ));
        }
        Ok(())
    }

    pub fn intervals(&self) -> u64 {
        self.total_ttis.div_ceil(self.decision_interval)
    }
}

/// Everything that happened in one decision interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// 1-based decision index.
    pub interval: u64,
    /// TTI at which the decision was taken (end of the observed window).
    pub tti: u64,
    pub report: TelemetryReport,
    pub reward: RewardSignal,
    pub proposed: ActionSet,
    pub verdict: Verdict,
    pub shadow: Option<ShadowOutcome>,
    /// The final action reached the live twin.
    pub applied: bool,
    pub checkpoint_id: Option<u64>,
    pub rollback: Option<RollbackAudit>,
    pub diagnostics: AgentDiagnostics,
    /// Flagged anomalies only.
    pub anomalies: Vec<AnomalyReport>,
    /// Holt forecast of next-interval offered load.
    pub load_forecast_bps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    config: LoopConfig,
    weights: ObjectiveWeights,
    twin: TwinState,
    agent: Agent,
    supervisor: Supervisor,
    interval: u64,
    trackers: Vec<AnomalyTracker>,
    load_history: Vec<f64>,
}

impl Episode {
    /// Builds the twin and agent and takes the initial checkpoint at TTI 0.
    pub fn new(
        setup: TwinSetup,
        config: LoopConfig,
        envelope: SafetyEnvelope,
        weights: ObjectiveWeights,
        seed: u64,
    ) -> Result<Self, ControlError> {
        config.validate().map_err(ControlError::InvalidConfig)?;
        envelope.validate().map_err(ControlError::InvalidConfig)?;
        weights.validate().map_err(ControlError::InvalidConfig)?;
        let twin = TwinState::new(setup, seed)?;
        let anneal = ((config.intervals() as f64) * ANNEAL_FRACTION).ceil() as u64;
        let agent = Agent::new(config.agent, twin.n_subbands(), envelope.power_max_dbm, anneal.max(1), seed);
        let mut supervisor = Supervisor::new(envelope);
        supervisor.checkpoint(&twin);
        let trackers = ANOMALY_METRICS.iter().map(|m| AnomalyTracker::new(*m)).collect();
        Ok(Self { config, weights, twin, agent, supervisor, interval: 0, trackers, load_history: Vec::new() })
    }

    pub fn config(&self) -> &LoopConfig {
        &self.config
    }

    pub fn weights(&self) -> &ObjectiveWeights {
        &self.weights
    }

    pub fn twin(&self) -> &TwinState {
        &self.twin
    }

    pub fn agent(&self) -> &Agent {
        &self.agent
    }

    pub fn supervisor(&self) -> &Supervisor {
        &self.supervisor
    }

    pub fn interval(&self) -> u64 {
        self.interval
    }

    /// Lengthens (or shortens) the episode. Used when resuming a saved
    /// episode for more TTIs than it was started with.
    pub fn set_total_ttis(&mut self, total_ttis: u64) -> Result<(), ControlError> {
        if total_ttis < self.twin.tti() {
            return Err(ControlError::InvalidConfig(format!(
                "total_ttis {total_ttis} is behind the episode, already at tti {}",
                self.twin.tti()
            )));
        }
        self.config.total_ttis = total_ttis;
        Ok(())
    }

    pub fn is_done(&self) -> bool {
        self.twin.tti() >= self.config.total_ttis
    }

    /// Runs one decision interval.
    pub fn step_interval(&mut self) -> Result<RunRecord, ControlError> {
        let remaining = self.config.total_ttis.saturating_sub(self.twin.tti());
        let n = self.config.decision_interval.min(remaining.max(1));
        self.interval += 1;

        // Observe.
        let stats = self.twin.advance(n);
        let report = aggregate(&stats)?;
        let reward = compute_reward(&report, &self.weights);
        self.supervisor.record_reward(reward.total);
        let anomalies = self.observe_anomalies(&report, reward.total);
        let load_forecast_bps = self.forecast(report.network.offered_load_bps);

        // Learn from the interval that just closed, then propose.
        let outcome = self.agent.learn(reward.total, &report)?;
        if outcome.diverged {
            log::warn!("interval {}: agent diverged and was reset", self.interval);
        }
        let proposed = self.agent.act(&report)?;

        // Supervise and actuate.
        let envelope = *self.supervisor.envelope();
        let verdict = validate_action(&envelope, self.twin.cells(), &proposed, self.twin.n_subbands());
        let mut shadow = None;
        let mut applied = false;
        if let Some(action) = verdict.final_action(&proposed) {
            if !action.is_empty() {
                let pass = if self.config.shadow_enabled {
                    let out =
                        shadow_evaluate(&self.twin, action, &envelope, &self.weights, self.supervisor.reward_ewma())?;
                    let pass = out.passed();
                    shadow = Some(out);
                    pass
                } else {
                    true
                };
                if pass {
                    let updates = resolve_action(&envelope, self.twin.cells(), action);
                    self.twin.apply_config(&updates)?;
                    applied = true;
                }
            }
        }

        // Checkpoint on cadence, but never in the middle of a degradation
        // streak, which would bless the degraded configuration.
        let mut checkpoint_id = None;
        if self.interval.is_multiple_of(self.config.checkpoint_interval) && !self.supervisor.degrading() {
            checkpoint_id = Some(self.supervisor.checkpoint(&self.twin).id());
        }

        let mut rollback = None;
        if self.supervisor.should_rollback() {
            let audit = self.supervisor.rollback(&mut self.twin)?;
            log::info!("interval {}: rolled back to checkpoint {}", self.interval, audit.checkpoint_id);
            self.agent.reset_exploration();
            rollback = Some(audit);
        }

        log::debug!("interval {} reward {:.4} verdict {}", self.interval, reward.total, verdict.kind());
        Ok(RunRecord {
            interval: self.interval,
            tti: self.twin.tti(),
            report,
            reward,
            proposed,
            verdict,
            shadow,
            applied,
            checkpoint_id,
            rollback,
            diagnostics: self.agent.diagnostics(),
            anomalies,
            load_forecast_bps,
        })
    }

    /// Steps until the configured length, handing each record to `sink`.
    pub fn run_with(&mut self, mut sink: impl FnMut(&RunRecord)) -> Result<(), ControlError> {
        while !self.is_done() {
            let record = self.step_interval()?;
            sink(&record);
        }
        Ok(())
    }

    fn observe_anomalies(&mut self, report: &TelemetryReport, reward: f64) -> Vec<AnomalyReport> {
        let values = [report.network.throughput_bps, report.network.p95_delay_ms, reward];
        self.trackers
            .iter_mut()
            .zip(values)
            .map(|(t, x)| t.observe(x, report.window))
            .filter(|r| r.flagged)
            .collect()
    }

    fn forecast(&mut self, load: f64) -> Option<f64> {
        self.load_history.push(load);
        if self.load_history.len() > LOAD_HISTORY {
            self.load_history.remove(0);
        }
        forecast_load(&self.load_history, 1).ok()
    }
}

/// Runs a full episode and returns every record plus the final state.
pub fn run_episode(
    setup: TwinSetup,
    config: LoopConfig,
    envelope: SafetyEnvelope,
    weights: ObjectiveWeights,
    seed: u64,
) -> Result<(Vec<RunRecord>, Episode), ControlError> {
    let mut episode = Episode::new(setup, config, envelope, weights, seed)?;
    let mut records = Vec::with_capacity(config.intervals() as usize);
    episode.run_with(|r| records.push(r.clone()))?;
    Ok((records, episode))
}

/// Mean reward over the last quarter of the records.
pub fn final_quarter_reward(records: &[RunRecord]) -> Option<f64> {
    if records.is_empty() {
        return None;
    }
    let start = records.len() - records.len().div_ceil(4);
    let tail = &records[start..];
    Some(tail.iter().map(|r| r.reward.total).sum::<f64>() / tail.len() as f64)
}

#[cfg(test)]
mod tests;
