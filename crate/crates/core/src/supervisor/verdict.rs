use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::SafetyEnvelope;
use crate::agents::ActionSet;
use crate::twin::CellConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    UnknownCell,
    DuplicateCell,
    InvalidAction,
    InvalidMask,
    MinActiveCells,
}

impl RejectReason {
    pub fn code(self) -> &'static str {
        match self {
            RejectReason::UnknownCell => "unknown-cell",
            RejectReason::DuplicateCell => "duplicate-cell",
            RejectReason::InvalidAction => "invalid-action",
            RejectReason::InvalidMask => "invalid-mask",
            RejectReason::MinActiveCells => "min-active-cells",
        }
    }
}

/// One clamp applied to a proposed power delta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Adjustment {
    pub cell_id: u32,
    pub requested_delta_db: f64,
    pub applied_delta_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Approved,
    Modified { action: ActionSet, adjustments: Vec<Adjustment> },
    Rejected { reason: RejectReason, detail: String },
}

impl Verdict {
    pub fn is_rejected(&self) -> bool {
        matches!(self, Verdict::Rejected { .. })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::Approved => "approved",
            Verdict::Modified { .. } => "modified",
            Verdict::Rejected { .. } => "rejected",
        }
    }

    /// The action that would be actuated, `None` when rejected.
    pub fn final_action<'a>(&'a self, proposed: &'a ActionSet) -> Option<&'a ActionSet> {
        match self {
            Verdict::Approved => Some(proposed),
            Verdict::Modified { action, .. } => Some(action),
            Verdict::Rejected { .. } => None,
        }
    }
}

fn reject(reason: RejectReason, detail: impl Into<String>) -> Verdict {
    Verdict::Rejected { reason, detail: detail.into() }
}

/// Checks a proposal against the envelope. Structural problems reject the
/// whole set; out-of-range power deltas are clamped. `n_subbands` bounds the
/// masks an action may request.
pub fn validate_action(
    envelope: &SafetyEnvelope,
    current: &[CellConfig],
    proposed: &ActionSet,
    n_subbands: u8,
) -> Verdict {
    if proposed.is_empty() {
        return Verdict::Approved;
    }
    let mut seen = BTreeSet::new();
    for e in &proposed.entries {
        if !seen.insert(e.cell_id) {
            return reject(RejectReason::DuplicateCell, format!("cell {} listed twice", e.cell_id));
        }
        if !current.iter().any(|c| c.cell_id == e.cell_id) {
            return reject(RejectReason::UnknownCell, format!("cell {}", e.cell_id));
        }
        if let Some(d) = e.power_delta_db {
            if !d.is_finite() {
                return reject(RejectReason::InvalidAction, format!("cell {}: power delta {d}", e.cell_id));
            }
        }
        if let Some(m) = e.subband_mask {
            if m.is_empty() || !m.fits(n_subbands) {
                return reject(RejectReason::InvalidMask, format!("cell {}: mask {m}", e.cell_id));
            }
        }
    }
    let active_after = current
        .iter()
        .filter(|c| proposed.get(c.cell_id).and_then(|e| e.sleep).map_or(c.active, |sleep| !sleep))
        .count() as u32;
    if active_after < envelope.min_active_cells {
        return reject(
            RejectReason::MinActiveCells,
            format!("{active_after} active cells after action, need {}", envelope.min_active_cells),
        );
    }

    let mut adjusted = proposed.clone();
    let mut adjustments = Vec::new();
    for e in adjusted.entries.iter_mut() {
        let Some(requested) = e.power_delta_db else { continue };
        let cell = current.iter().find(|c| c.cell_id == e.cell_id).expect("checked above");
        let step = requested.clamp(-envelope.max_power_step_db, envelope.max_power_step_db);
        // Only recompute the delta when the absolute bound bites; (p + d) - p
        // is not d in floating point.
        let target = cell.tx_power_dbm + step;
        let applied = if target > envelope.power_max_dbm {
            envelope.power_max_dbm - cell.tx_power_dbm
        } else if target < envelope.power_min_dbm {
            envelope.power_min_dbm - cell.tx_power_dbm
        } else {
            step
        };
        if applied != requested {
            e.power_delta_db = Some(applied);
            adjustments.push(Adjustment { cell_id: e.cell_id, requested_delta_db: requested, applied_delta_db: applied });
        }
    }
    if adjustments.is_empty() {
        Verdict::Approved
    } else {
        Verdict::Modified { action: adjusted, adjustments }
    }
}

/// Absolute configurations for every cell the action touches. Power is
/// clamped into the envelope so the result is always actuatable.
pub fn resolve_action(envelope: &SafetyEnvelope, current: &[CellConfig], action: &ActionSet) -> Vec<CellConfig> {
    action
        .entries
        .iter()
        .filter_map(|e| {
            let mut c = current.iter().find(|c| c.cell_id == e.cell_id)?.clone();
            if let Some(d) = e.power_delta_db {
                c.tx_power_dbm = (c.tx_power_dbm + d).clamp(envelope.power_min_dbm, envelope.power_max_dbm);
            }
            if let Some(m) = e.subband_mask {
                c.subband_mask = m;
            }
            if let Some(sleep) = e.sleep {
                c.active = !sleep;
            }
            Some(c)
        })
        .collect()
}
