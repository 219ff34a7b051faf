use serde::{Deserialize, Serialize};

use super::TelemetryReport;

pub const LOAD_LEVELS: u8 = 4;
pub const INTERFERENCE_LEVELS: u8 = 4;
/// PRB-utilisation cut points for load levels 1, 2, 3.
pub const UTILIZATION_CUTS: [f64; 3] = [0.25, 0.5, 0.75];
/// Mean-SINR cut points (dB) for interference levels 1, 2, 3.
pub const SINR_CUTS_DB: [f64; 3] = [15.0, 8.0, 2.0];

/// Tabular state of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellState {
    pub load_level: u8,
    pub interference_level: u8,
    /// Current mask bits minus one (0..2^S − 1 for non-empty masks).
    pub mask_index: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiscreteState {
    /// `(cell_id, state)` in report order.
    pub cells: Vec<(u32, CellState)>,
}

impl DiscreteState {
    pub fn cell(&self, cell_id: u32) -> Option<CellState> {
        self.cells.iter().find(|(id, _)| *id == cell_id).map(|(_, s)| *s)
    }
}

pub fn load_level(utilization: f64) -> u8 {
    UTILIZATION_CUTS.iter().filter(|&&c| utilization >= c).count() as u8
}

/// 0 = clean (SINR ≥ 15 dB) … 3 = heavily interfered (SINR < 2 dB).
/// Cells without attached UEs count as clean.
pub fn interference_level(mean_sinr_db: Option<f64>) -> u8 {
    match mean_sinr_db {
        Some(s) => SINR_CUTS_DB.iter().filter(|&&c| s < c).count() as u8,
        None => 0,
    }
}

pub fn discretize_state(report: &TelemetryReport) -> DiscreteState {
    DiscreteState {
        cells: report
            .cells
            .iter()
            .map(|c| {
                let state = CellState {
                    load_level: load_level(c.prb_utilization),
                    interference_level: interference_level(c.mean_sinr_db),
                    mask_index: c.subband_mask.bits().saturating_sub(1),
                };
                (c.cell_id, state)
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_lookup() {
        assert_eq!((load_level(0.0), interference_level(Some(30.0))), (0, 0));
        assert_eq!((load_level(0.6), interference_level(Some(5.0))), (2, 2));
        assert_eq!((load_level(1.0), interference_level(Some(-5.0))), (3, 3));
        assert_eq!(load_level(0.25), 1);
        assert_eq!(interference_level(Some(15.0)), 0);
        assert_eq!(interference_level(Some(14.999)), 1);
        assert_eq!(interference_level(None), 0);
    }

    proptest::proptest! {
        #[test]
        fn levels_in_bounds(u in -1.0f64..2.0, s in -50.0f64..60.0) {
            proptest::prop_assert!(load_level(u) < LOAD_LEVELS);
            proptest::prop_assert!(interference_level(Some(s)) < INTERFERENCE_LEVELS);
        }
    }
}
