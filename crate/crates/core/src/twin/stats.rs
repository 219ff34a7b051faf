use serde::{Deserialize, Serialize};

use super::config::SubbandMask;

/// What one UE experienced during one TTI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UeTtiStats {
    pub ue_id: u32,
    pub serving_cell: Option<u32>,
    pub rsrp_dbm: Option<f64>,
    /// Wideband SINR over the serving cell's sub-bands (linear mean, in dB).
    pub sinr_db: Option<f64>,
    pub arrived_bits: u64,
    pub delivered_bits: u64,
    pub harq_transmissions: u32,
    pub harq_nacks: u32,
    pub harq_drops: u32,
    /// Head-of-line packet age when the UE was served, ms.
    pub hol_delay_ms: Option<f64>,
    /// Delays of packets that completed this TTI, ms.
    pub completed_delays_ms: Vec<f64>,
    pub buffer_bits: u64,
    /// Age of the oldest queued packet after service, ms.
    pub oldest_age_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellTtiStats {
    pub cell_id: u32,
    pub active: bool,
    pub tx_power_dbm: f64,
    pub subband_mask: SubbandMask,
    /// PRBs actually carrying data (fractional when a grant is partly filled).
    pub prbs_used: f64,
    pub prbs_available: f64,
    pub energy_j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtiStats {
    pub tti: u64,
    pub ues: Vec<UeTtiStats>,
    pub cells: Vec<CellTtiStats>,
}
