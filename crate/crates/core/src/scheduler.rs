//! Proportional-fair allocation of sub-bands within one cell.

use serde::{Deserialize, Serialize};

/// Floor applied to the PF history so fresh UEs get a finite metric.
pub const PF_AVG_FLOOR_BPS: f64 = 1e-3;
pub const DEFAULT_PF_ALPHA: f64 = 0.01;
/// Absolute tolerance for metric comparisons; equal within it means tie.
pub const METRIC_EPS: f64 = 1e-9;

/// One backlogged UE competing for a cell's sub-bands.
#[derive(Debug, Clone, PartialEq)]
pub struct PfCandidate {
    pub ue_id: u32,
    pub avg_throughput_bps: f64,
    /// Achievable rate on each sub-band in bits/s, `None` where the cell
    /// does not transmit.
    pub subband_rates_bps: Vec<Option<f64>>,
}

impl PfCandidate {
    pub fn metric(&self, subband: usize) -> Option<f64> {
        self.subband_rates_bps[subband].map(|r| r / self.avg_throughput_bps.max(PF_AVG_FLOOR_BPS))
    }
}

/// Grant of one sub-band to one UE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grant {
    pub cell_id: u32,
    pub ue_id: u32,
    pub subband: u8,
    /// PRBs in the sub-band; may be fractional.
    pub prbs: f64,
}

/// For every sub-band, the UE with the largest PF metric. Ties resolve to the
/// lowest `ue_id`. Returns one entry per sub-band, `None` where the cell is
/// silent or nobody is backlogged.
pub fn pf_allocate(candidates: &[PfCandidate], n_subbands: usize) -> Vec<Option<u32>> {
    let mut order: Vec<&PfCandidate> = candidates.iter().collect();
    order.sort_by_key(|c| c.ue_id);
    (0..n_subbands)
        .map(|sb| {
            let mut best: Option<(u32, f64)> = None;
            for c in &order {
                let Some(m) = c.metric(sb) else { continue };
                match best {
                    Some((_, b)) if m <= b + METRIC_EPS => {}
                    _ => best = Some((c.ue_id, m)),
                }
            }
            best.map(|(id, _)| id)
        })
        .collect()
}

/// EWMA update of the PF history with the rate delivered this TTI.
pub fn update_average(avg_bps: f64, delivered_bps: f64, alpha: f64) -> f64 {
    (1.0 - alpha) * avg_bps + alpha * delivered_bps
}
