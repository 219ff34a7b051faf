use serde::{Deserialize, Serialize};

use crate::twin::SubbandMask;

/// Discrete power steps available to tabular and random agents, dB.
pub const POWER_STEPS_DB: [f64; 5] = [-3.0, -1.0, 0.0, 1.0, 3.0];

/// Proposed change to one cell. Absent fields are left untouched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellAction {
    pub cell_id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_delta_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subband_mask: Option<SubbandMask>,
    /// `Some(true)` puts the cell to sleep, `Some(false)` wakes it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sleep: Option<bool>,
}

impl CellAction {
    pub fn new(cell_id: u32) -> Self {
        Self { cell_id, power_delta_db: None, subband_mask: None, sleep: None }
    }

    pub fn is_noop(&self) -> bool {
        self.power_delta_db.is_none() && self.subband_mask.is_none() && self.sleep.is_none()
    }
}

/// Per-cell proposals for one decision interval. Empty is the explicit no-op.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionSet {
    pub entries: Vec<CellAction>,
}

impl ActionSet {
    pub fn noop() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds an entry, dropping it if it changes nothing. Entries stay sorted
    /// by cell id.
    pub fn push(&mut self, action: CellAction) {
        if action.is_noop() {
            return;
        }
        let at = self.entries.partition_point(|e| e.cell_id < action.cell_id);
        self.entries.insert(at, action);
    }

    pub fn get(&self, cell_id: u32) -> Option<&CellAction> {
        self.entries.iter().find(|e| e.cell_id == cell_id)
    }
}

/// Maps discrete action ids to sub-band masks: id `a` ↔ mask bits `a + 1`,
/// covering every non-empty mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskCatalog {
    pub n_subbands: u8,
}

impl MaskCatalog {
    pub fn new(n_subbands: u8) -> Self {
        Self { n_subbands }
    }

    pub fn len(&self) -> usize {
        (1usize << self.n_subbands) - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mask(&self, action_id: u16) -> SubbandMask {
        SubbandMask::from_bits((action_id + 1) as u8)
    }

    pub fn action_id(&self, mask: SubbandMask) -> Option<u16> {
        (!mask.is_empty() && mask.fits(self.n_subbands)).then(|| u16::from(mask.bits()) - 1)
    }
}

/// A single-field action a baseline can pick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum CatalogAction {
    Mask(SubbandMask),
    Power(f64),
    Sleep(bool),
}

impl CatalogAction {
    pub fn to_cell_action(self, cell_id: u32) -> CellAction {
        let mut a = CellAction::new(cell_id);
        match self {
            CatalogAction::Mask(m) => a.subband_mask = Some(m),
            CatalogAction::Power(d) => a.power_delta_db = Some(d),
            CatalogAction::Sleep(s) => a.sleep = Some(s),
        }
        a
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionCatalog {
    pub actions: Vec<CatalogAction>,
}

impl ActionCatalog {
    /// Every non-empty mask, every discrete power step, sleep and wake.
    pub fn standard(n_subbands: u8) -> Self {
        let masks = MaskCatalog::new(n_subbands);
        let mut actions: Vec<CatalogAction> =
            (0..masks.len() as u16).map(|a| CatalogAction::Mask(masks.mask(a))).collect();
        actions.extend(POWER_STEPS_DB.iter().map(|&d| CatalogAction::Power(d)));
        actions.push(CatalogAction::Sleep(true));
        actions.push(CatalogAction::Sleep(false));
        Self { actions }
    }
}
