//! Decision makers that turn telemetry into [`ActionSet`]s.
//!
//! Per-cell agents share one set of parameters (one Q-table, one
//! actor–critic) and all receive the same network-level reward. Agents only
//! ever see the report of the window that just closed.

mod action;
mod actor_critic;
mod baseline;
mod qlearn;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use action::{ActionCatalog, ActionSet, CatalogAction, CellAction, MaskCatalog, POWER_STEPS_DB};
pub use actor_critic::{
    ac_act, ac_update, cell_features, policy_log_density, policy_log_gradient, ActorCriticParams, DEFAULT_AC_GAMMA,
    DEFAULT_ALPHA_ACTOR, DEFAULT_ALPHA_CRITIC, DEFAULT_POLICY_SIGMA_DB, FEATURE_DIM,
};
pub use baseline::{baseline_act, BaselineKind};
pub use qlearn::{
    q_select, ActionId, EpsilonSchedule, QTable, DEFAULT_EPSILON_END, DEFAULT_EPSILON_START, DEFAULT_Q_ALPHA,
    DEFAULT_Q_GAMMA,
};

use crate::observer::{discretize_state, CellState, TelemetryReport};
use crate::rng::{streams, RngStream};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error("invalid reward {0}")]
    InvalidReward(f64),
    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    FeatureDimension { expected: usize, got: usize },
    #[error("diverged: parameters would become non-finite")]
    Diverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Static,
    Random,
    QlearnSubband,
    ActorcriticPower,
    Combined,
}

impl AgentKind {
    pub const ALL: [AgentKind; 5] =
        [AgentKind::Static, AgentKind::Random, AgentKind::QlearnSubband, AgentKind::ActorcriticPower, AgentKind::Combined];

    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Static => "static",
            AgentKind::Random => "random",
            AgentKind::QlearnSubband => "qlearn_subband",
            AgentKind::ActorcriticPower => "actorcritic_power",
            AgentKind::Combined => "combined",
        }
    }

    pub fn uses_qlearning(self) -> bool {
        matches!(self, AgentKind::QlearnSubband | AgentKind::Combined)
    }

    pub fn uses_actor_critic(self) -> bool {
        matches!(self, AgentKind::ActorcriticPower | AgentKind::Combined)
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AgentKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown agent kind `{s}` (expected one of static, random, qlearn_subband, actorcritic_power, combined)"))
    }
}

/// What the agent proposed last time, kept until the reward arrives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Pending {
    cells: Vec<PendingCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PendingCell {
    cell_id: u32,
    state: CellState,
    mask_action: Option<ActionId>,
    features: Vec<f64>,
    power_action: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AgentDiagnostics {
    pub epsilon: Option<f64>,
    pub max_q: Option<f64>,
    pub theta_norm: Option<f64>,
    /// Actor–critic parameters were reset after diverging this interval.
    pub reset: bool,
}

/// Learning outcome of one interval.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LearnOutcome {
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    kind: AgentKind,
    masks: MaskCatalog,
    catalog: ActionCatalog,
    q: QTable,
    epsilon: EpsilonSchedule,
    ac: ActorCriticParams,
    power_max_dbm: f64,
    rng: RngStream,
    pending: Option<Pending>,
    reset_pending: bool,
}

impl Agent {
    /// `anneal_steps` is the number of decisions over which ε anneals.
    pub fn new(kind: AgentKind, n_subbands: u8, power_max_dbm: f64, anneal_steps: u64, seed: u64) -> Self {
        let masks = MaskCatalog::new(n_subbands);
        Self {
            kind,
            masks,
            catalog: ActionCatalog::standard(n_subbands),
            q: QTable::new(masks.len() as u16),
            epsilon: EpsilonSchedule::new(anneal_steps),
            ac: ActorCriticParams::new(FEATURE_DIM),
            power_max_dbm,
            rng: RngStream::new(seed, streams::AGENT),
            pending: None,
            reset_pending: false,
        }
    }

    pub fn kind(&self) -> AgentKind {
        self.kind
    }

    pub fn q_table(&self) -> &QTable {
        &self.q
    }

    pub fn actor_critic(&self) -> &ActorCriticParams {
        &self.ac
    }

    pub fn epsilon(&self) -> &EpsilonSchedule {
        &self.epsilon
    }

    /// Learns from the transition that ended with `report` and earned
    /// `reward`, using what was proposed at the previous decision.
    pub fn learn(&mut self, reward: f64, report: &TelemetryReport) -> Result<LearnOutcome, AgentError> {
        let Some(pending) = self.pending.take() else { return Ok(LearnOutcome::default()) };
        let next = discretize_state(report);
        let mut outcome = LearnOutcome::default();
        for cell in &pending.cells {
            let Some(cell_report) = report.cell(cell.cell_id) else { continue };
            if let (Some(a), Some(next_state)) = (cell.mask_action, next.cell(cell.cell_id)) {
                self.q.update(cell.state, a, reward, next_state)?;
            }
            if let Some(a) = cell.power_action {
                let next_features = cell_features(cell_report, report, self.power_max_dbm);
                match ac_update(&mut self.ac, &cell.features, a, reward, &next_features) {
                    Ok(_) => {}
                    Err(AgentError::Diverged) => {
                        log::warn!("actor-critic diverged; resetting parameters");
                        self.ac = ActorCriticParams::new(FEATURE_DIM);
                        self.reset_pending = true;
                        outcome.diverged = true;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(outcome)
    }

    /// Proposes actions for the next interval from the report that just
    /// closed. Sleeping cells are left alone except by the random baseline.
    pub fn act(&mut self, report: &TelemetryReport) -> Result<ActionSet, AgentError> {
        let mut set = ActionSet::noop();
        match self.kind {
            AgentKind::Static => return Ok(set),
            AgentKind::Random => {
                let ids: Vec<u32> = report.cells.iter().map(|c| c.cell_id).collect();
                return Ok(baseline_act(BaselineKind::Random, &self.catalog, &ids, &mut self.rng));
            }
            _ => {}
        }
        let state = discretize_state(report);
        let eps = self.epsilon.value();
        let mut pending = Pending { cells: Vec::new() };
        for cell in report.cells.iter().filter(|c| c.active) {
            let cell_state = state.cell(cell.cell_id).expect("state built from the same report");
            let features = cell_features(cell, report, self.power_max_dbm);
            let mut action = CellAction::new(cell.cell_id);
            let mut mask_action = None;
            let mut power_action = None;
            if self.kind.uses_qlearning() {
                let a = q_select(cell_state, &self.q, eps, &mut self.rng);
                let mask = self.masks.mask(a);
                if mask != cell.subband_mask {
                    action.subband_mask = Some(mask);
                }
                mask_action = Some(a);
            }
            if self.kind.uses_actor_critic() {
                let delta = ac_act(&self.ac, &features, &mut self.rng)?;
                action.power_delta_db = Some(delta);
                power_action = Some(delta);
            }
            set.push(action);
            pending.cells.push(PendingCell { cell_id: cell.cell_id, state: cell_state, mask_action, features, power_action });
        }
        self.epsilon.advance();
        self.pending = Some(pending);
        Ok(set)
    }

    /// Restores initial exploration after a rollback.
    pub fn reset_exploration(&mut self) {
        self.epsilon.reset();
    }

    pub fn diagnostics(&mut self) -> AgentDiagnostics {
        let reset = std::mem::take(&mut self.reset_pending);
        AgentDiagnostics {
            epsilon: self.kind.uses_qlearning().then(|| self.epsilon.value()),
            max_q: self.kind.uses_qlearning().then(|| self.q.global_max()),
            theta_norm: self.kind.uses_actor_critic().then(|| self.ac.theta_norm()),
            reset,
        }
    }
}
