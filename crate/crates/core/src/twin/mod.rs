//! Deterministic per-TTI simulation of a small LTE/NR cell cluster.
//!
//! [`TwinState`] is the complete simulated network: cell configurations,
//! UEs with their packet queues, the channel matrix, the TTI counter and the
//! cursors of every random stream. Given the same setup, seed and sequence
//! of configuration updates, [`TwinState::advance`] produces bit-identical
//! statistics. [`TwinState::fork`] clones the whole thing, random streams
//! included, so a fork replays exactly what its parent would have done.

mod channel;
mod config;
mod stats;
mod ue;

use std::collections::VecDeque;

use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use channel::{compute_rsrp, ChannelState, Link, UeChannel};
pub use config::{
    Bounds, CellConfig, Point, SubbandMask, ALLOWED_PRB_COUNTS, DEFAULT_POWER_MAX_DBM, DEFAULT_SUBBANDS, MAX_SUBBANDS,
};
pub use stats::{CellTtiStats, TtiStats, UeTtiStats};
pub use ue::{Packet, UserEquipment, Velocity, DEFAULT_NOISE_FIGURE_DB};

use crate::harq::{harq_transmit, HarqConfig, HarqOutcome};
use crate::radio::{self, PRB_BANDWIDTH_HZ};
use crate::rng::{derive_seed, streams, RngStream};
use crate::scheduler::{pf_allocate, update_average, Grant, PfCandidate, DEFAULT_PF_ALPHA};

pub const TTI_SECONDS: f64 = 1e-3;
pub const SLEEP_POWER_FRACTION: f64 = 0.1;
pub const DEFAULT_SHADOWING_SIGMA_DB: f64 = 8.0;
pub const DEFAULT_COHERENCE_TTIS: u64 = 1000;
pub const DEFAULT_REATTACH_TTIS: u64 = 1000;
pub const DEFAULT_PACKET_BITS: u64 = 12_000;
pub const DEFAULT_HARQ_RTT_MS: f64 = 8.0;
pub const DEFAULT_STATS_HISTORY: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TwinError {
    #[error("unknown cell {0}")]
    UnknownCell(u32),
    #[error("invalid cell {cell_id}: {reason}")]
    InvalidCell { cell_id: u32, reason: String },
    #[error("invalid setup: {0}")]
    InvalidSetup(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mobility {
    None,
    RandomWaypoint { min_speed_mps: f64, max_speed_mps: f64 },
}

/// Piecewise-constant load multiplier over `[start_tti, end_tti)`. Applies to
/// one UE, or to all of them when `ue_id` is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadSegment {
    pub start_tti: u64,
    pub end_tti: u64,
    pub multiplier: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ue_id: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultField {
    TxPower,
    Active,
    SubbandMask,
}

/// Exogenous configuration change applied at the start of `tti`, outside
/// any supervision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultEvent {
    pub tti: u64,
    pub cell_id: u32,
    pub field: FaultField,
    pub value: f64,
}

/// Initial UE description. `position: None` means uniform placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UeSpec {
    pub position: Option<Point>,
    pub mean_offered_load_bps: f64,
    pub noise_figure_db: f64,
}

/// Everything needed to build a twin apart from the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwinSetup {
    pub bounds: Bounds,
    pub n_subbands: u8,
    pub cells: Vec<CellConfig>,
    pub ues: Vec<UeSpec>,
    pub mobility: Mobility,
    pub packet_bits: u64,
    pub load_schedule: Vec<LoadSegment>,
    pub faults: Vec<FaultEvent>,
    pub shadowing_sigma_db: f64,
    pub coherence_ttis: u64,
    pub reattach_ttis: u64,
    pub harq: HarqConfig,
    pub harq_rtt_ms: f64,
    pub pf_alpha: f64,
    pub power_max_dbm: f64,
    pub stats_history: usize,
}

impl TwinSetup {
    /// Setup with default model parameters around the given cells and UEs.
    pub fn new(bounds: Bounds, cells: Vec<CellConfig>, ues: Vec<UeSpec>) -> Self {
        Self {
            bounds,
            n_subbands: DEFAULT_SUBBANDS,
            cells,
            ues,
            mobility: Mobility::None,
            packet_bits: DEFAULT_PACKET_BITS,
            load_schedule: Vec::new(),
            faults: Vec::new(),
            shadowing_sigma_db: DEFAULT_SHADOWING_SIGMA_DB,
            coherence_ttis: DEFAULT_COHERENCE_TTIS,
            reattach_ttis: DEFAULT_REATTACH_TTIS,
            harq: HarqConfig::default(),
            harq_rtt_ms: DEFAULT_HARQ_RTT_MS,
            pf_alpha: DEFAULT_PF_ALPHA,
            power_max_dbm: DEFAULT_POWER_MAX_DBM,
            stats_history: DEFAULT_STATS_HISTORY,
        }
    }

    pub fn validate(&self) -> Result<(), TwinError> {
        let bad = |m: String| Err(TwinError::InvalidSetup(m));
        if self.cells.is_empty() {
            return bad("at least one cell required".into());
        }
        if self.ues.is_empty() {
            return bad("at least one UE required".into());
        }
        if self.n_subbands == 0 || self.n_subbands > MAX_SUBBANDS {
            return bad(format!("sub-band count {} outside 1..={MAX_SUBBANDS}", self.n_subbands));
        }
        let mut ids: Vec<u32> = self.cells.iter().map(|c| c.cell_id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return bad("duplicate cell id".into());
        }
        for c in &self.cells {
            c.validate(self.n_subbands, self.power_max_dbm)?;
            if !self.bounds.contains(c.position) {
                return bad(format!("cell {} outside area bounds", c.cell_id));
            }
        }
        for (i, u) in self.ues.iter().enumerate() {
            if let Some(p) = u.position {
                if !self.bounds.contains(p) {
                    return bad(format!("ue {i} outside area bounds"));
                }
            }
            if !(u.mean_offered_load_bps >= 0.0) || !u.mean_offered_load_bps.is_finite() {
                return bad(format!("ue {i} offered load must be finite and non-negative"));
            }
        }
        if self.packet_bits == 0 || self.coherence_ttis == 0 || self.reattach_ttis == 0 {
            return bad("packet size and model intervals must be positive".into());
        }
        if self.harq.max_transmissions == 0 {
            return bad("max HARQ transmissions must be at least 1".into());
        }
        if !(self.pf_alpha > 0.0 && self.pf_alpha <= 1.0) {
            return bad("pf_alpha must be in (0, 1]".into());
        }
        if let Mobility::RandomWaypoint { min_speed_mps, max_speed_mps } = self.mobility {
            if !(min_speed_mps >= 0.0 && max_speed_mps >= min_speed_mps) {
                return bad("mobility speed range invalid".into());
            }
        }
        for f in &self.faults {
            if !ids.contains(&f.cell_id) {
                return Err(TwinError::UnknownCell(f.cell_id));
            }
        }
        Ok(())
    }
}

/// Outcome of one TTI's scheduling pass.
pub type Allocation = Vec<Grant>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Streams {
    traffic: RngStream,
    mobility: RngStream,
    shadowing: RngStream,
    harq: RngStream,
}

impl Streams {
    fn new(seed: u64) -> Self {
        Self {
            traffic: RngStream::new(seed, streams::TRAFFIC),
            mobility: RngStream::new(seed, streams::MOBILITY),
            shadowing: RngStream::new(seed, streams::SHADOWING),
            harq: RngStream::new(seed, streams::HARQ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwinState {
    setup: TwinSetup,
    seed: u64,
    tti: u64,
    cells: Vec<CellConfig>,
    ues: Vec<UserEquipment>,
    channel: ChannelState,
    streams: Streams,
    history: VecDeque<TtiStats>,
}

impl TwinState {
    /// Builds the network at TTI 0: places UEs, draws the first shadowing
    /// realisation and attaches every UE to its strongest cell.
    pub fn new(setup: TwinSetup, seed: u64) -> Result<Self, TwinError> {
        setup.validate()?;
        let mut cells = setup.cells.clone();
        cells.sort_by_key(|c| c.cell_id);
        let mut placement = RngStream::new(seed, streams::PLACEMENT);
        let b = setup.bounds;
        let ues = setup
            .ues
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                let pos = spec.position.unwrap_or_else(|| {
                    let x = placement.uniform_range(b.min.x, b.max.x);
                    let y = placement.uniform_range(b.min.y, b.max.y);
                    Point::new(x, y)
                });
                UserEquipment::new(i as u32, pos, spec.mean_offered_load_bps, spec.noise_figure_db)
            })
            .collect::<Vec<_>>();
        let channel = ChannelState::new(cells.len(), ues.len(), setup.n_subbands);
        let mut state = Self {
            seed,
            tti: 0,
            cells,
            ues,
            channel,
            streams: Streams::new(seed),
            history: VecDeque::with_capacity(setup.stats_history),
            setup,
        };
        state.draw_shadowing();
        state.channel.update_links(&state.cells, &state.ues);
        state.reattach_all();
        state.channel.update_quality(&state.cells, &state.ues);
        Ok(state)
    }

    pub fn setup(&self) -> &TwinSetup {
        &self.setup
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn tti(&self) -> u64 {
        self.tti
    }

    pub fn cells(&self) -> &[CellConfig] {
        &self.cells
    }

    pub fn ues(&self) -> &[UserEquipment] {
        &self.ues
    }

    pub fn channel(&self) -> &ChannelState {
        &self.channel
    }

    pub fn n_subbands(&self) -> u8 {
        self.setup.n_subbands
    }

    /// Most recent TTI statistics, oldest first.
    pub fn history(&self) -> &VecDeque<TtiStats> {
        &self.history
    }

    pub fn rng_cursors(&self) -> [crate::rng::RngCursor; 4] {
        [
            self.streams.traffic.cursor(),
            self.streams.mobility.cursor(),
            self.streams.shadowing.cursor(),
            self.streams.harq.cursor(),
        ]
    }

    pub fn cell(&self, cell_id: u32) -> Option<&CellConfig> {
        self.cells.iter().find(|c| c.cell_id == cell_id)
    }

    fn cell_index(&self, cell_id: u32) -> Option<usize> {
        self.cells.iter().position(|c| c.cell_id == cell_id)
    }

    /// RSRP of `cell_id` at `ue_id`, `None` if the cell sleeps.
    pub fn rsrp(&self, cell_id: u32, ue_id: u32) -> Option<f64> {
        let ci = self.cell_index(cell_id)?;
        self.channel.link(ci, ue_id as usize).rsrp_dbm
    }

    /// RSRP of each UE from its serving cell.
    pub fn serving_rsrp(&self, ue_id: u32) -> Option<f64> {
        let ue = self.ues.get(ue_id as usize)?;
        self.rsrp(ue.serving_cell?, ue_id)
    }

    /// Independent deep copy that replays exactly what this state would do
    /// under the same inputs.
    pub fn fork(&self) -> TwinState {
        self.clone()
    }

    /// Deep copy whose random streams are re-derived from
    /// `(seed, tti, ordinal)`, so it explores a different realisation of the
    /// same network.
    pub fn fork_reseeded(&self, ordinal: u64) -> TwinState {
        let mut child = self.clone();
        child.seed = derive_seed(self.seed, self.tti, ordinal);
        child.streams = Streams::new(child.seed);
        child
    }

    /// SHA-256 over the serialized state.
    pub fn digest(&self) -> [u8; 32] {
        let bytes = serde_json::to_vec(self).expect("twin state serializes");
        Sha256::digest(&bytes).into()
    }

    /// Replaces the listed cell configurations atomically. Channel and
    /// attachment are refreshed before the next TTI.
    pub fn apply_config(&mut self, updates: &[CellConfig]) -> Result<(), TwinError> {
        if updates.is_empty() {
            return Ok(());
        }
        let mut next = self.cells.clone();
        for u in updates {
            let idx = self.cell_index(u.cell_id).ok_or(TwinError::UnknownCell(u.cell_id))?;
            u.validate(self.setup.n_subbands, self.setup.power_max_dbm)?;
            next[idx] = u.clone();
        }
        if next == self.cells {
            return Ok(());
        }
        self.cells = next;
        self.channel.update_links(&self.cells, &self.ues);
        self.reattach_all();
        self.channel.update_quality(&self.cells, &self.ues);
        Ok(())
    }

    fn draw_shadowing(&mut self) {
        let sigma = self.setup.shadowing_sigma_db;
        let normal = (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("finite sigma"));
        for link in self.channel.links.iter_mut() {
            link.shadowing_db = match &normal {
                Some(n) => n.sample(self.streams.shadowing.rng_mut()),
                None => 0.0,
            };
        }
    }

    fn reattach_all(&mut self) {
        for ui in 0..self.ues.len() {
            let best = self.channel.strongest_cell(&self.cells, ui);
            self.ues[ui].serving_cell = best.map(|ci| self.cells[ci].cell_id);
        }
    }

    fn apply_faults(&mut self) {
        let due: Vec<FaultEvent> = self.setup.faults.iter().filter(|f| f.tti == self.tti).cloned().collect();
        if due.is_empty() {
            return;
        }
        let mut updates: Vec<CellConfig> = Vec::new();
        for f in due {
            let Some(base) = updates
                .iter()
                .find(|c| c.cell_id == f.cell_id)
                .cloned()
                .or_else(|| self.cell(f.cell_id).cloned())
            else {
                continue;
            };
            let mut c = base;
            match f.field {
                FaultField::TxPower => c.tx_power_dbm = f.value.clamp(0.0, self.setup.power_max_dbm),
                FaultField::Active => c.active = f.value != 0.0,
                FaultField::SubbandMask => {
                    let bits = f.value.max(0.0) as u8;
                    let m = SubbandMask::from_bits(bits);
                    if m.fits(self.setup.n_subbands) && !m.is_empty() {
                        c.subband_mask = m;
                    }
                }
            }
            updates.retain(|u| u.cell_id != c.cell_id);
            updates.push(c);
        }
        if let Err(e) = self.apply_config(&updates) {
            log::warn!("fault at tti {} ignored: {e}", self.tti);
        }
    }

    fn load_multiplier(&self, ue_id: u32) -> f64 {
        self.setup
            .load_schedule
            .iter()
            .filter(|s| s.start_tti <= self.tti && self.tti < s.end_tti && s.ue_id.is_none_or(|id| id == ue_id))
            .map(|s| s.multiplier)
            .product()
    }

    fn arrivals(&mut self) -> Vec<u64> {
        let packet_bits = self.setup.packet_bits;
        let mut arrived = vec![0u64; self.ues.len()];
        for ui in 0..self.ues.len() {
            let load = self.ues[ui].mean_offered_load_bps * self.load_multiplier(ui as u32);
            let lambda = load * TTI_SECONDS / packet_bits as f64;
            if !(lambda > 0.0) {
                continue;
            }
            let n = Poisson::new(lambda).expect("positive rate").sample(self.streams.traffic.rng_mut()) as u64;
            for _ in 0..n {
                self.ues[ui].enqueue(Packet { arrival_tti: self.tti, remaining_bits: packet_bits });
            }
            arrived[ui] = n * packet_bits;
        }
        arrived
    }

    fn move_ues(&mut self) -> bool {
        let Mobility::RandomWaypoint { min_speed_mps, max_speed_mps } = self.setup.mobility else {
            return false;
        };
        let b = self.setup.bounds;
        let rng = &mut self.streams.mobility;
        for ue in &mut self.ues {
            let target = match ue.waypoint {
                Some(w) if w.distance(ue.position) > 1e-9 => w,
                _ => {
                    let w = Point::new(rng.uniform_range(b.min.x, b.max.x), rng.uniform_range(b.min.y, b.max.y));
                    ue.velocity.speed_mps = rng.uniform_range(min_speed_mps, max_speed_mps);
                    ue.waypoint = Some(w);
                    w
                }
            };
            let step = ue.velocity.speed_mps * TTI_SECONDS;
            let dist = target.distance(ue.position);
            ue.velocity.heading = (target.y - ue.position.y).atan2(target.x - ue.position.x);
            ue.position = if dist <= step {
                target
            } else {
                let f = step / dist;
                Point::new(ue.position.x + f * (target.x - ue.position.x), ue.position.y + f * (target.y - ue.position.y))
            };
            ue.position = b.clip(ue.position);
        }
        true
    }

    /// Achievable bits in one TTI on one sub-band for `ue_idx`.
    fn subband_capacity_bits(&self, cell_idx: usize, ue_idx: usize, subband: usize) -> Option<(u64, f64)> {
        let sinr = self.channel.ues[ue_idx].sinr_db[subband]?;
        let prbs = self.cells[cell_idx].subband_prbs(self.setup.n_subbands);
        let bits = (prbs * PRB_BANDWIDTH_HZ * TTI_SECONDS * radio::spectral_efficiency(sinr)).floor();
        Some((bits as u64, sinr))
    }

    /// Proportional-fair allocation for the current TTI, cells in id order.
    pub fn schedule_tti(&self) -> Allocation {
        let n_sb = usize::from(self.setup.n_subbands);
        let mut grants = Vec::new();
        for (ci, cell) in self.cells.iter().enumerate() {
            if !cell.active {
                continue;
            }
            let candidates: Vec<PfCandidate> = self
                .ues
                .iter()
                .enumerate()
                .filter(|(_, u)| u.serving_cell == Some(cell.cell_id) && u.buffer_bits > 0)
                .map(|(ui, u)| PfCandidate {
                    ue_id: u.ue_id,
                    avg_throughput_bps: u.avg_throughput_bps,
                    subband_rates_bps: (0..n_sb)
                        .map(|sb| self.subband_capacity_bits(ci, ui, sb).map(|(b, _)| b as f64 / TTI_SECONDS))
                        .collect(),
                })
                .collect();
            let prbs = cell.subband_prbs(self.setup.n_subbands);
            for (sb, winner) in pf_allocate(&candidates, n_sb).into_iter().enumerate() {
                if let Some(ue_id) = winner {
                    grants.push(Grant { cell_id: cell.cell_id, ue_id, subband: sb as u8, prbs });
                }
            }
        }
        grants
    }

    /// Runs `n_tti` TTIs and returns their statistics in order.
    pub fn advance(&mut self, n_tti: u64) -> Vec<TtiStats> {
        (0..n_tti).map(|_| self.step()).collect()
    }

    fn step(&mut self) -> TtiStats {
        let t = self.tti;
        self.apply_faults();

        let arrived = self.arrivals();

        let mut dirty = self.move_ues();
        if t > 0 && t.is_multiple_of(self.setup.coherence_ttis) {
            self.draw_shadowing();
            dirty = true;
        }
        if dirty {
            self.channel.update_links(&self.cells, &self.ues);
        }
        let reattach = t > 0 && t.is_multiple_of(self.setup.reattach_ttis);
        if reattach {
            self.reattach_all();
        }
        if dirty || reattach {
            self.channel.update_quality(&self.cells, &self.ues);
        }

        let grants = self.schedule_tti();

        let n_ue = self.ues.len();
        let mut ue_stats: Vec<UeTtiStats> = self
            .ues
            .iter()
            .enumerate()
            .map(|(ui, u)| UeTtiStats {
                ue_id: u.ue_id,
                serving_cell: u.serving_cell,
                rsrp_dbm: u.serving_cell.and_then(|c| self.rsrp(c, u.ue_id)),
                sinr_db: wideband_sinr(&self.channel.ues[ui].sinr_db),
                arrived_bits: arrived[ui],
                delivered_bits: 0,
                harq_transmissions: 0,
                harq_nacks: 0,
                harq_drops: 0,
                hol_delay_ms: None,
                completed_delays_ms: Vec::new(),
                buffer_bits: 0,
                oldest_age_ms: None,
            })
            .collect();
        let mut prbs_used = vec![0.0f64; self.cells.len()];
        let harq_cfg = self.setup.harq;
        for g in &grants {
            let ci = self.cell_index(g.cell_id).expect("granting cell exists");
            let ui = g.ue_id as usize;
            let Some((cap, sinr)) = self.subband_capacity_bits(ci, ui, usize::from(g.subband)) else { continue };
            let tb = cap.min(self.ues[ui].buffer_bits);
            if tb == 0 {
                continue;
            }
            let cqi = self.channel.ues[ui].cqi[usize::from(g.subband)].unwrap_or(radio::Cqi::MIN);
            let outcome = harq_transmit(sinr, cqi, &harq_cfg, &mut self.streams.harq);
            prbs_used[ci] += g.prbs * tb as f64 / cap as f64;
            let s = &mut ue_stats[ui];
            s.harq_transmissions += u32::from(outcome.transmissions(&harq_cfg));
            s.harq_nacks += u32::from(outcome.nacks(&harq_cfg));
            if s.hol_delay_ms.is_none() {
                s.hol_delay_ms = self.ues[ui].head_arrival().map(|a| (t - a + 1) as f64);
            }
            match outcome {
                HarqOutcome::Ack { transmissions } => {
                    let extra = f64::from(transmissions - 1) * self.setup.harq_rtt_ms;
                    for arrival in self.ues[ui].drain(tb) {
                        s.completed_delays_ms.push((t - arrival + 1) as f64 + extra);
                    }
                    s.delivered_bits += tb;
                }
                HarqOutcome::Drop => s.harq_drops += 1,
            }
        }

        let alpha = self.setup.pf_alpha;
        for ui in 0..n_ue {
            let ue = &mut self.ues[ui];
            let s = &mut ue_stats[ui];
            ue.avg_throughput_bps = update_average(ue.avg_throughput_bps, s.delivered_bits as f64 / TTI_SECONDS, alpha);
            s.buffer_bits = ue.buffer_bits;
            s.oldest_age_ms = ue.head_arrival().map(|a| (t - a + 1) as f64);
        }

        let n_sb = self.setup.n_subbands;
        let cell_stats = self
            .cells
            .iter()
            .zip(&prbs_used)
            .map(|(c, &used)| {
                let watts = if c.active {
                    c.idle_power_w + c.per_prb_tx_power_w * used
                } else {
                    SLEEP_POWER_FRACTION * c.idle_power_w
                };
                CellTtiStats {
                    cell_id: c.cell_id,
                    active: c.active,
                    tx_power_dbm: c.tx_power_dbm,
                    subband_mask: c.subband_mask,
                    prbs_used: used,
                    prbs_available: c.available_prbs(n_sb),
                    energy_j: watts * TTI_SECONDS,
                }
            })
            .collect();

        let stats = TtiStats { tti: t, ues: ue_stats, cells: cell_stats };
        if self.setup.stats_history > 0 {
            if self.history.len() == self.setup.stats_history {
                self.history.pop_front();
            }
            self.history.push_back(stats.clone());
        }
        self.tti += 1;
        stats
    }
}

/// Linear-mean SINR across the sub-bands the serving cell transmits on.
fn wideband_sinr(per_subband: &[Option<f64>]) -> Option<f64> {
    let (sum, n) = per_subband
        .iter()
        .flatten()
        .fold((0.0, 0u32), |(s, n), &db| (s + radio::db_to_linear(db), n + 1));
    (n > 0).then(|| radio::linear_to_db(sum / f64::from(n)))
}
