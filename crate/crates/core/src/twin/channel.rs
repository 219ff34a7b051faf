use serde::{Deserialize, Serialize};

use super::config::CellConfig;
use super::ue::UserEquipment;
use crate::radio::{self, Cqi};

/// Propagation state of one (cell, UE) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub path_loss_db: f64,
    pub shadowing_db: f64,
    /// Received power per PRB were the cell transmitting, dBm.
    pub rx_prb_dbm: f64,
    /// `None` while the cell sleeps.
    pub rsrp_dbm: Option<f64>,
}

/// Per-UE view of its serving cell on each sub-band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UeChannel {
    /// `None` where the serving cell does not transmit.
    pub sinr_db: Vec<Option<f64>>,
    pub cqi: Vec<Option<Cqi>>,
    pub rsrq_db: Option<f64>,
}

/// Cell-major matrix of links plus per-UE sub-band quality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelState {
    pub n_cells: usize,
    pub n_ues: usize,
    pub n_subbands: u8,
    pub links: Vec<Link>,
    pub ues: Vec<UeChannel>,
}

/// RSRP of `cell` at a UE with the given path loss and shadowing, or `None`
/// when the cell is asleep.
pub fn compute_rsrp(cell: &CellConfig, path_loss_db: f64, shadowing_db: f64) -> Option<f64> {
    cell.active.then(|| {
        radio::rsrp_dbm(cell.tx_power_dbm, cell.n_prb, cell.antenna_gain_dbi, path_loss_db, shadowing_db)
    })
}

impl ChannelState {
    pub fn new(n_cells: usize, n_ues: usize, n_subbands: u8) -> Self {
        let blank = Link { path_loss_db: 0.0, shadowing_db: 0.0, rx_prb_dbm: f64::NEG_INFINITY, rsrp_dbm: None };
        Self {
            n_cells,
            n_ues,
            n_subbands,
            links: vec![blank; n_cells * n_ues],
            ues: vec![
                UeChannel {
                    sinr_db: vec![None; usize::from(n_subbands)],
                    cqi: vec![None; usize::from(n_subbands)],
                    rsrq_db: None,
                };
                n_ues
            ],
        }
    }

    #[inline]
    pub fn link(&self, cell_idx: usize, ue_idx: usize) -> &Link {
        &self.links[cell_idx * self.n_ues + ue_idx]
    }

    #[inline]
    pub fn link_mut(&mut self, cell_idx: usize, ue_idx: usize) -> &mut Link {
        &mut self.links[cell_idx * self.n_ues + ue_idx]
    }

    /// Path loss and RSRP for every pair. Shadowing is left as stored.
    pub fn update_links(&mut self, cells: &[CellConfig], ues: &[UserEquipment]) {
        for (ci, cell) in cells.iter().enumerate() {
            let per_prb = radio::per_prb_power_dbm(cell.tx_power_dbm, cell.n_prb) + cell.antenna_gain_dbi;
            for (ui, ue) in ues.iter().enumerate() {
                let link = self.link_mut(ci, ui);
                link.path_loss_db = radio::path_loss_db(cell.position.distance(ue.position));
                link.rx_prb_dbm = per_prb - link.path_loss_db - link.shadowing_db;
                link.rsrp_dbm = compute_rsrp(cell, link.path_loss_db, link.shadowing_db);
            }
        }
    }

    /// Index of the active cell with the strongest RSRP at `ue_idx`; ties go
    /// to the lowest cell id.
    pub fn strongest_cell(&self, cells: &[CellConfig], ue_idx: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (ci, cell) in cells.iter().enumerate() {
            let Some(rsrp) = self.link(ci, ue_idx).rsrp_dbm else { continue };
            match best {
                Some((bi, b)) if rsrp < b || (rsrp == b && cells[bi].cell_id < cell.cell_id) => {}
                _ => best = Some((ci, rsrp)),
            }
        }
        best.map(|(ci, _)| ci)
    }

    /// SINR on `subband` for `ue_idx` served by `serving_idx`, treating every
    /// other active cell that transmits on the sub-band as an interferer.
    pub fn sinr_db(
        &self,
        cells: &[CellConfig],
        serving_idx: usize,
        ue_idx: usize,
        subband: usize,
        noise_figure_db: f64,
    ) -> Option<f64> {
        let serving = &cells[serving_idx];
        if !serving.transmits_on(subband) {
            return None;
        }
        let width = serving.subband_prbs(self.n_subbands);
        let signal = radio::db_to_linear(self.link(serving_idx, ue_idx).rx_prb_dbm) * width;
        let interference: f64 = cells
            .iter()
            .enumerate()
            .filter(|&(ci, c)| ci != serving_idx && c.transmits_on(subband))
            .map(|(ci, _)| radio::db_to_linear(self.link(ci, ue_idx).rx_prb_dbm) * width)
            .sum();
        let noise = radio::db_to_linear(radio::subband_noise_dbm(width, noise_figure_db));
        Some(radio::sinr_db(signal, interference, noise))
    }

    /// RSRQ measured over the serving cell's carrier, assuming every active
    /// cell fully loads the sub-bands it transmits on.
    pub fn rsrq_db(&self, cells: &[CellConfig], serving_idx: usize, ue_idx: usize, noise_figure_db: f64) -> Option<f64> {
        let serving = &cells[serving_idx];
        let rsrp = self.link(serving_idx, ue_idx).rsrp_dbm?;
        let n_prb = f64::from(serving.n_prb);
        let n_sb = f64::from(self.n_subbands);
        let rssi: f64 = cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.active)
            .map(|(ci, c)| {
                radio::db_to_linear(self.link(ci, ue_idx).rx_prb_dbm) * n_prb * f64::from(c.subband_mask.count()) / n_sb
            })
            .sum::<f64>()
            + radio::db_to_linear(radio::subband_noise_dbm(n_prb, noise_figure_db));
        radio::rsrq_db(rsrp, rssi, serving.n_prb).ok()
    }

    /// Recomputes sub-band SINR, CQI and RSRQ from the stored links and the
    /// UEs' current serving cells.
    pub fn update_quality(&mut self, cells: &[CellConfig], ues: &[UserEquipment]) {
        for (ui, ue) in ues.iter().enumerate() {
            let serving_idx = ue.serving_cell.and_then(|id| cells.iter().position(|c| c.cell_id == id));
            let mut sinr = vec![None; usize::from(self.n_subbands)];
            let mut cqi = vec![None; usize::from(self.n_subbands)];
            let mut rsrq = None;
            if let Some(si) = serving_idx {
                for sb in 0..usize::from(self.n_subbands) {
                    sinr[sb] = self.sinr_db(cells, si, ui, sb, ue.noise_figure_db);
                    cqi[sb] = sinr[sb].and_then(|s| radio::map_cqi(s).ok()).map(|r| r.cqi);
                }
                rsrq = self.rsrq_db(cells, si, ui, ue.noise_figure_db);
            }
            self.ues[ui] = UeChannel { sinr_db: sinr, cqi, rsrq_db: rsrq };
        }
    }
}
