//! HARQ with chase-combining abstraction.
//!
//! Block error rate of a transmission is an exponential in the SINR margin
//! over the selected CQI threshold; every retransmission adds a fixed
//! combining gain to the effective SINR.

use serde::{Deserialize, Serialize};

use crate::radio::Cqi;
use crate::rng::RngStream;

pub const BLER_AT_THRESHOLD: f64 = 0.1;
pub const BLER_FLOOR: f64 = 1e-4;
pub const DEFAULT_MAX_HARQ_TX: u8 = 4;
pub const DEFAULT_COMBINING_GAIN_DB: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarqConfig {
    pub max_transmissions: u8,
    pub combining_gain_db: f64,
}

impl Default for HarqConfig {
    fn default() -> Self {
        Self {
            max_transmissions: DEFAULT_MAX_HARQ_TX,
            combining_gain_db: DEFAULT_COMBINING_GAIN_DB,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HarqOutcome {
    /// Decoded after this many transmissions (1 = first attempt).
    Ack { transmissions: u8 },
    /// All `max_transmissions` attempts failed.
    Drop,
}

impl HarqOutcome {
    pub fn transmissions(self, cfg: &HarqConfig) -> u8 {
        match self {
            HarqOutcome::Ack { transmissions } => transmissions,
            HarqOutcome::Drop => cfg.max_transmissions,
        }
    }

    pub fn nacks(self, cfg: &HarqConfig) -> u8 {
        match self {
            HarqOutcome::Ack { transmissions } => transmissions - 1,
            HarqOutcome::Drop => cfg.max_transmissions,
        }
    }
}

/// Block error probability for a single transmission at `sinr_db` using the
/// MCS of `cqi`.
pub fn block_error_rate(sinr_db: f64, cqi: Cqi) -> f64 {
    let margin = sinr_db - cqi.threshold_db();
    (BLER_AT_THRESHOLD * 10f64.powf(-margin / 2.0)).clamp(BLER_FLOOR, 1.0)
}

/// Runs one HARQ process to completion. Draws exactly one uniform per
/// transmission attempt.
pub fn harq_transmit(sinr_db: f64, cqi: Cqi, cfg: &HarqConfig, rng: &mut RngStream) -> HarqOutcome {
    for attempt in 1..=cfg.max_transmissions {
        let effective = sinr_db + cfg.combining_gain_db * f64::from(attempt - 1);
        let bler = block_error_rate(effective, cqi);
        if rng.uniform() >= bler {
            return HarqOutcome::Ack { transmissions: attempt };
        }
    }
    HarqOutcome::Drop
}
