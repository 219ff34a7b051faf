use serde::{Deserialize, Serialize};

use super::{jain_index, ObserverError};
use crate::radio::PRB_BANDWIDTH_HZ;
use crate::twin::{SubbandMask, TtiStats, TTI_SECONDS};

/// Half-open TTI range `[start_tti, end_tti)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start_tti: u64,
    pub end_tti: u64,
}

impl Window {
    pub fn len(&self) -> u64 {
        self.end_tti - self.start_tti
    }

    pub fn is_empty(&self) -> bool {
        self.end_tti == self.start_tti
    }

    pub fn seconds(&self) -> f64 {
        self.len() as f64 * TTI_SECONDS
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub cell_id: u32,
    /// Configuration in force at the end of the window.
    pub active: bool,
    pub tx_power_dbm: f64,
    pub subband_mask: SubbandMask,
    /// UEs attached at the end of the window.
    pub attached_ues: u32,
    /// Over attached UEs and TTIs; absent when nobody was attached.
    pub mean_rsrp_dbm: Option<f64>,
    pub min_rsrp_dbm: Option<f64>,
    pub mean_sinr_db: Option<f64>,
    pub harq_nack_ratio: f64,
    pub mean_buffer_bytes: f64,
    pub prb_utilization: f64,
    pub throughput_bps: f64,
    pub energy_j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkReport {
    /// Delivered bits per Hz of PRB bandwidth actually used.
    pub spectral_efficiency: f64,
    pub jain_fairness: f64,
    pub p95_delay_ms: f64,
    pub total_power_w: f64,
    pub throughput_bps: f64,
    pub offered_load_bps: f64,
    pub min_ue_rsrp_dbm: Option<f64>,
    pub harq_drops: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelemetryReport {
    pub window: Window,
    pub cells: Vec<CellReport>,
    pub network: NetworkReport,
}

impl TelemetryReport {
    pub fn cell(&self, cell_id: u32) -> Option<&CellReport> {
        self.cells.iter().find(|c| c.cell_id == cell_id)
    }
}

/// Nearest-rank percentile (`p` in `(0, 100]`) of unsorted samples.
pub fn percentile_nearest_rank(samples: &[f64], p: f64) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((p / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    Some(sorted[rank.min(sorted.len()) - 1])
}

#[derive(Default, Clone)]
struct CellAcc {
    rsrp_sum: f64,
    rsrp_min: Option<f64>,
    rsrp_n: u64,
    sinr_sum: f64,
    sinr_n: u64,
    tx: u64,
    nacks: u64,
    buffer_bits: f64,
    used: f64,
    available: f64,
    delivered: u64,
    energy: f64,
}

/// Folds a window of per-TTI statistics into one report.
///
/// Delay samples are the delays of packets completed inside the window plus
/// the age of every packet still at the head of a queue when the window
/// closes, so a starved UE raises the tail instead of vanishing from it.
pub fn aggregate(stats: &[TtiStats]) -> Result<TelemetryReport, ObserverError> {
    let (first, last) = match (stats.first(), stats.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(ObserverError::EmptyWindow),
    };
    let window = Window { start_tti: first.tti, end_tti: last.tti + 1 };
    let n_tti = stats.len() as f64;
    let secs = n_tti * TTI_SECONDS;

    let cell_ids: Vec<u32> = last.cells.iter().map(|c| c.cell_id).collect();
    let idx_of = |id: u32| cell_ids.iter().position(|&c| c == id);
    let mut acc = vec![CellAcc::default(); cell_ids.len()];
    let n_ue = last.ues.len();
    let mut per_ue_bits = vec![0u64; n_ue];
    let mut offered = 0u64;
    let mut drops = 0u64;
    let mut delays: Vec<f64> = Vec::new();
    let mut min_rsrp: Option<f64> = None;

    for tti in stats {
        for c in &tti.cells {
            if let Some(i) = idx_of(c.cell_id) {
                acc[i].used += c.prbs_used;
                acc[i].available += c.prbs_available;
                acc[i].energy += c.energy_j;
            }
        }
        for (ui, u) in tti.ues.iter().enumerate() {
            offered += u.arrived_bits;
            drops += u64::from(u.harq_drops);
            delays.extend_from_slice(&u.completed_delays_ms);
            if let Some(b) = per_ue_bits.get_mut(ui) {
                *b += u.delivered_bits;
            }
            if let Some(r) = u.rsrp_dbm {
                min_rsrp = Some(min_rsrp.map_or(r, |m: f64| m.min(r)));
            }
            let Some(i) = u.serving_cell.and_then(idx_of) else { continue };
            let a = &mut acc[i];
            if let Some(r) = u.rsrp_dbm {
                a.rsrp_sum += r;
                a.rsrp_n += 1;
                a.rsrp_min = Some(a.rsrp_min.map_or(r, |m: f64| m.min(r)));
            }
            if let Some(s) = u.sinr_db {
                a.sinr_sum += s;
                a.sinr_n += 1;
            }
            a.tx += u64::from(u.harq_transmissions);
            a.nacks += u64::from(u.harq_nacks);
            a.buffer_bits += u.buffer_bits as f64;
            a.delivered += u.delivered_bits;
        }
    }
    delays.extend(last.ues.iter().filter_map(|u| u.oldest_age_ms));

    let cells = last
        .cells
        .iter()
        .zip(&acc)
        .map(|(c, a)| CellReport {
            cell_id: c.cell_id,
            active: c.active,
            tx_power_dbm: c.tx_power_dbm,
            subband_mask: c.subband_mask,
            attached_ues: last.ues.iter().filter(|u| u.serving_cell == Some(c.cell_id)).count() as u32,
            mean_rsrp_dbm: (a.rsrp_n > 0).then(|| a.rsrp_sum / a.rsrp_n as f64),
            min_rsrp_dbm: a.rsrp_min,
            mean_sinr_db: (a.sinr_n > 0).then(|| a.sinr_sum / a.sinr_n as f64),
            harq_nack_ratio: if a.tx > 0 { a.nacks as f64 / a.tx as f64 } else { 0.0 },
            mean_buffer_bytes: a.buffer_bits / 8.0 / n_tti,
            prb_utilization: if a.available > 0.0 { (a.used / a.available).clamp(0.0, 1.0) } else { 0.0 },
            throughput_bps: a.delivered as f64 / secs,
            energy_j: a.energy,
        })
        .collect::<Vec<_>>();

    let used_hz_s: f64 = acc.iter().map(|a| a.used).sum::<f64>() * PRB_BANDWIDTH_HZ * TTI_SECONDS;
    let delivered: u64 = per_ue_bits.iter().sum();
    let throughputs: Vec<f64> = per_ue_bits.iter().map(|&b| b as f64 / secs).collect();
    let energy: f64 = acc.iter().map(|a| a.energy).sum();
    let network = NetworkReport {
        spectral_efficiency: if used_hz_s > 0.0 { delivered as f64 / used_hz_s } else { 0.0 },
        // Nobody served at all reads as perfectly (vacuously) fair.
        jain_fairness: jain_index(&throughputs).unwrap_or(1.0),
        p95_delay_ms: percentile_nearest_rank(&delays, 95.0).unwrap_or(0.0),
        total_power_w: energy / secs,
        throughput_bps: delivered as f64 / secs,
        offered_load_bps: offered as f64 / secs,
        min_ue_rsrp_dbm: min_rsrp,
        harq_drops: drops,
    };
    Ok(TelemetryReport { window, cells, network })
}
