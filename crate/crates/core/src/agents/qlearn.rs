use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::AgentError;
use crate::observer::CellState;
use crate::rng::RngStream;

pub const DEFAULT_Q_ALPHA: f64 = 0.1;
pub const DEFAULT_Q_GAMMA: f64 = 0.9;
pub const DEFAULT_EPSILON_START: f64 = 0.2;
pub const DEFAULT_EPSILON_END: f64 = 0.01;

pub type ActionId = u16;

/// Sparse Q-table over `(CellState, action)`. Unvisited entries read as 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "QTableRepr", from = "QTableRepr")]
pub struct QTable {
    pub n_actions: u16,
    pub alpha: f64,
    pub gamma: f64,
    values: BTreeMap<(CellState, ActionId), f64>,
}

#[derive(Serialize, Deserialize)]
struct QEntry {
    state: CellState,
    action: ActionId,
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct QTableRepr {
    n_actions: u16,
    alpha: f64,
    gamma: f64,
    entries: Vec<QEntry>,
}

impl From<QTable> for QTableRepr {
    fn from(t: QTable) -> Self {
        Self {
            n_actions: t.n_actions,
            alpha: t.alpha,
            gamma: t.gamma,
            entries: t.values.into_iter().map(|((state, action), value)| QEntry { state, action, value }).collect(),
        }
    }
}

impl From<QTableRepr> for QTable {
    fn from(r: QTableRepr) -> Self {
        Self {
            n_actions: r.n_actions,
            alpha: r.alpha,
            gamma: r.gamma,
            values: r.entries.into_iter().map(|e| ((e.state, e.action), e.value)).collect(),
        }
    }
}

impl QTable {
    pub fn new(n_actions: u16) -> Self {
        Self::with_rates(n_actions, DEFAULT_Q_ALPHA, DEFAULT_Q_GAMMA)
    }

    pub fn with_rates(n_actions: u16, alpha: f64, gamma: f64) -> Self {
        Self { n_actions, alpha, gamma, values: BTreeMap::new() }
    }

    pub fn get(&self, state: CellState, action: ActionId) -> f64 {
        self.values.get(&(state, action)).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, state: CellState, action: ActionId, value: f64) {
        self.values.insert((state, action), value);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(CellState, ActionId), &f64)> {
        self.values.iter()
    }

    /// Best action in `state`; ties go to the lowest id.
    pub fn argmax(&self, state: CellState) -> ActionId {
        let mut best = (0, self.get(state, 0));
        for a in 1..self.n_actions {
            let q = self.get(state, a);
            if q > best.1 {
                best = (a, q);
            }
        }
        best.0
    }

    pub fn max_value(&self, state: CellState) -> f64 {
        (0..self.n_actions).map(|a| self.get(state, a)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest value anywhere in the table, 0 when empty.
    pub fn global_max(&self) -> f64 {
        self.values.values().copied().fold(0.0, f64::max)
    }

    /// One-step Q-learning backup of `(state, action)` toward
    /// `reward + γ·max Q(next, ·)`. Touches exactly that entry.
    pub fn update(&mut self, state: CellState, action: ActionId, reward: f64, next: CellState) -> Result<f64, AgentError> {
        if !reward.is_finite() {
            return Err(AgentError::InvalidReward(reward));
        }
        let q = self.get(state, action);
        let target = reward + self.gamma * self.max_value(next);
        let updated = q + self.alpha * (target - q);
        if !updated.is_finite() {
            return Err(AgentError::Diverged);
        }
        if updated != q || self.values.contains_key(&(state, action)) {
            self.values.insert((state, action), updated);
        }
        Ok(updated)
    }
}

/// Linearly annealed exploration rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    /// Decisions over which ε falls from `start` to `end`.
    pub anneal_steps: u64,
    pub step: u64,
}

impl EpsilonSchedule {
    pub fn new(anneal_steps: u64) -> Self {
        Self { start: DEFAULT_EPSILON_START, end: DEFAULT_EPSILON_END, anneal_steps, step: 0 }
    }

    pub fn constant(eps: f64) -> Self {
        Self { start: eps, end: eps, anneal_steps: 0, step: 0 }
    }

    pub fn value(&self) -> f64 {
        if self.anneal_steps == 0 || self.step >= self.anneal_steps {
            return self.end;
        }
        let frac = self.step as f64 / self.anneal_steps as f64;
        self.start + (self.end - self.start) * frac
    }

    pub fn advance(&mut self) {
        self.step = self.step.saturating_add(1);
    }

    pub fn reset(&mut self) {
        self.step = 0;
    }
}

/// ε-greedy choice. Always consumes one uniform draw, plus one index draw
/// when exploring.
pub fn q_select(state: CellState, table: &QTable, epsilon: f64, rng: &mut RngStream) -> ActionId {
    if rng.uniform() < epsilon {
        rng.index(usize::from(table.n_actions)) as ActionId
    } else {
        table.argmax(state)
    }
}
