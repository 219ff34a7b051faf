use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::IoError;
use crate::agents::AgentKind;
use crate::control::{LoopConfig, DEFAULT_CHECKPOINT_INTERVAL, DEFAULT_DECISION_INTERVAL};
use crate::harq::HarqConfig;
use crate::observer::ObjectiveWeights;
use crate::scheduler::DEFAULT_PF_ALPHA;
use crate::supervisor::SafetyEnvelope;
use crate::twin::{
    Bounds, CellConfig, FaultEvent, LoadSegment, Mobility, Point, SubbandMask, TwinSetup, UeSpec,
    DEFAULT_COHERENCE_TTIS, DEFAULT_HARQ_RTT_MS, DEFAULT_NOISE_FIGURE_DB, DEFAULT_PACKET_BITS,
    DEFAULT_REATTACH_TTIS, DEFAULT_SHADOWING_SIGMA_DB, DEFAULT_STATS_HISTORY, DEFAULT_SUBBANDS, MAX_SUBBANDS,
};

pub const DEFAULT_TX_POWER_DBM: f64 = 43.0;
pub const DEFAULT_N_PRB: u32 = 50;
pub const DEFAULT_IDLE_POWER_W: f64 = 100.0;
pub const DEFAULT_PER_PRB_POWER_W: f64 = 2.0;
pub const DEFAULT_OFFERED_LOAD_BPS: f64 = 1e6;
pub const DEFAULT_TOTAL_TTIS: u64 = 20_000;

/// An experiment definition. Every optional key is filled in by
/// [`parse_scenario`], so serializing a parsed scenario yields a document
/// that states every parameter explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default = "default_subbands")]
    pub subbands: u8,
    pub area: Area,
    pub cells: Vec<CellSpec>,
    pub ues: UePlan,
    #[serde(default = "no_mobility")]
    pub mobility: Mobility,
    #[serde(default)]
    pub traffic: TrafficSpec,
    #[serde(default)]
    pub faults: Vec<FaultEvent>,
    #[serde(default)]
    pub channel: ChannelSpec,
    #[serde(default)]
    pub harq: HarqSpec,
    #[serde(default)]
    pub scheduler: SchedulerSpec,
    #[serde(default)]
    pub objective: ObjectiveWeights,
    #[serde(default)]
    pub safety: SafetyEnvelope,
    #[serde(default, rename = "loop")]
    pub control: LoopSpec,
}

fn default_subbands() -> u8 {
    DEFAULT_SUBBANDS
}

fn no_mobility() -> Mobility {
    Mobility::None
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Area {
    #[serde(default)]
    pub min_x: f64,
    #[serde(default)]
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    #[serde(default = "default_tx_power")]
    pub tx_power_dbm: f64,
    #[serde(default)]
    pub antenna_gain_dbi: f64,
    #[serde(default = "default_n_prb")]
    pub n_prb: u32,
    /// Bit `i` enables sub-band `i`. Defaults to every sub-band.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subband_mask: Option<SubbandMask>,
    #[serde(default = "yes")]
    pub active: bool,
    #[serde(default = "default_idle_power")]
    pub idle_power_w: f64,
    #[serde(default = "default_per_prb_power")]
    pub per_prb_power_w: f64,
}

fn default_tx_power() -> f64 {
    DEFAULT_TX_POWER_DBM
}
fn default_n_prb() -> u32 {
    DEFAULT_N_PRB
}
fn yes() -> bool {
    true
}
fn default_idle_power() -> f64 {
    DEFAULT_IDLE_POWER_W
}
fn default_per_prb_power() -> f64 {
    DEFAULT_PER_PRB_POWER_W
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Uniform,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UePlan {
    pub count: u32,
    #[serde(default = "uniform")]
    pub placement: Placement,
    /// Required, one per UE, when placement is explicit.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub positions: Vec<Point>,
    #[serde(default = "default_load")]
    pub mean_offered_load_bps: f64,
    #[serde(default = "default_noise_figure")]
    pub noise_figure_db: f64,
}

fn uniform() -> Placement {
    Placement::Uniform
}
fn default_load() -> f64 {
    DEFAULT_OFFERED_LOAD_BPS
}
fn default_noise_figure() -> f64 {
    DEFAULT_NOISE_FIGURE_DB
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrafficSpec {
    pub packet_bits: u64,
    pub schedule: Vec<LoadSegment>,
}

impl Default for TrafficSpec {
    fn default() -> Self {
        Self { packet_bits: DEFAULT_PACKET_BITS, schedule: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelSpec {
    pub shadowing_sigma_db: f64,
    pub coherence_ttis: u64,
    pub reattach_ttis: u64,
}

impl Default for ChannelSpec {
    fn default() -> Self {
        Self {
            shadowing_sigma_db: DEFAULT_SHADOWING_SIGMA_DB,
            coherence_ttis: DEFAULT_COHERENCE_TTIS,
            reattach_ttis: DEFAULT_REATTACH_TTIS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarqSpec {
    pub max_transmissions: u8,
    pub combining_gain_db: f64,
    pub rtt_ms: f64,
}

impl Default for HarqSpec {
    fn default() -> Self {
        let h = HarqConfig::default();
        Self { max_transmissions: h.max_transmissions, combining_gain_db: h.combining_gain_db, rtt_ms: DEFAULT_HARQ_RTT_MS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchedulerSpec {
    pub pf_alpha: f64,
}

impl Default for SchedulerSpec {
    fn default() -> Self {
        Self { pf_alpha: DEFAULT_PF_ALPHA }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoopSpec {
    pub decision_interval: u64,
    pub checkpoint_interval: u64,
    pub total_ttis: u64,
    pub agent: AgentKind,
    pub shadow_enabled: bool,
}

impl Default for LoopSpec {
    fn default() -> Self {
        Self {
            decision_interval: DEFAULT_DECISION_INTERVAL,
            checkpoint_interval: DEFAULT_CHECKPOINT_INTERVAL,
            total_ttis: DEFAULT_TOTAL_TTIS,
            agent: AgentKind::Static,
            shadow_enabled: true,
        }
    }
}

/// Parses and fully validates a scenario document. Unknown keys anywhere
/// in the document are collected and reported together.
pub fn parse_scenario(text: &str) -> Result<Scenario, IoError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| IoError::Syntax(e.to_string()))?;
    let has_p_ref = table.get("objective").and_then(|o| o.get("p_ref")).is_some();
    let mut unknown = Vec::new();
    let mut scenario: Scenario =
        serde_ignored::deserialize(toml::Value::Table(table), |path| unknown.push(path.to_string()))
            .map_err(|e| IoError::Syntax(e.to_string()))?;
    if !unknown.is_empty() {
        return Err(IoError::UnknownKeys(unknown));
    }
    let n_sb = scenario.subbands;
    for c in &mut scenario.cells {
        if c.subband_mask.is_none() && n_sb <= MAX_SUBBANDS {
            c.subband_mask = Some(SubbandMask::full(n_sb));
        }
    }
    if !has_p_ref {
        scenario.objective.p_ref = scenario.full_load_power_w();
    }
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    parse_scenario(&text)
}

impl Scenario {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes to TOML")
    }

    /// Power drawn with every cell awake and every PRB in use. Used as the
    /// default energy normaliser.
    pub fn full_load_power_w(&self) -> f64 {
        let p: f64 = self.cells.iter().map(|c| c.idle_power_w + c.per_prb_power_w * f64::from(c.n_prb)).sum();
        if p > 0.0 {
            p
        } else {
            ObjectiveWeights::default().p_ref
        }
    }

    pub fn bounds(&self) -> Bounds {
        Bounds { min: Point::new(self.area.min_x, self.area.min_y), max: Point::new(self.area.max_x, self.area.max_y) }
    }

    pub fn cell_configs(&self) -> Vec<CellConfig> {
        self.cells
            .iter()
            .map(|c| CellConfig {
                cell_id: c.id,
                position: Point::new(c.x, c.y),
                tx_power_dbm: c.tx_power_dbm,
                antenna_gain_dbi: c.antenna_gain_dbi,
                n_prb: c.n_prb,
                subband_mask: c.subband_mask.unwrap_or_else(|| SubbandMask::full(self.subbands)),
                active: c.active,
                idle_power_w: c.idle_power_w,
                per_prb_tx_power_w: c.per_prb_power_w,
            })
            .collect()
    }

    pub fn twin_setup(&self) -> TwinSetup {
        let ues = (0..self.ues.count as usize)
            .map(|i| UeSpec {
                position: match self.ues.placement {
                    Placement::Uniform => None,
                    Placement::Explicit => self.ues.positions.get(i).copied(),
                },
                mean_offered_load_bps: self.ues.mean_offered_load_bps,
                noise_figure_db: self.ues.noise_figure_db,
            })
            .collect();
        TwinSetup {
            bounds: self.bounds(),
            n_subbands: self.subbands,
            cells: self.cell_configs(),
            ues,
            mobility: self.mobility.clone(),
            packet_bits: self.traffic.packet_bits,
            load_schedule: self.traffic.schedule.clone(),
            faults: self.faults.clone(),
            shadowing_sigma_db: self.channel.shadowing_sigma_db,
            coherence_ttis: self.channel.coherence_ttis,
            reattach_ttis: self.channel.reattach_ttis,
            harq: HarqConfig {
                max_transmissions: self.harq.max_transmissions,
                combining_gain_db: self.harq.combining_gain_db,
            },
            harq_rtt_ms: self.harq.rtt_ms,
            pf_alpha: self.scheduler.pf_alpha,
            power_max_dbm: self.safety.power_max_dbm,
            stats_history: DEFAULT_STATS_HISTORY,
        }
    }

    pub fn loop_config(&self) -> LoopConfig {
        LoopConfig {
            decision_interval: self.control.decision_interval,
            checkpoint_interval: self.control.checkpoint_interval,
            total_ttis: self.control.total_ttis,
            agent: self.control.agent,
            shadow_enabled: self.control.shadow_enabled,
        }
    }

    /// Checks every invariant, reporting the first violation with the path
    /// of the offending field.
    pub fn validate(&self) -> Result<(), IoError> {
        let bad = |path: String, msg: String| Err(IoError::invalid(path, msg));
        if self.name.trim().is_empty() {
            return bad("name".into(), "must not be empty".into());
        }
        if self.subbands == 0 || self.subbands > MAX_SUBBANDS {
            return bad("subbands".into(), format!("{} outside 1..={MAX_SUBBANDS}", self.subbands));
        }
        let a = &self.area;
        if ![a.min_x, a.min_y, a.max_x, a.max_y].iter().all(|v| v.is_finite()) || a.min_x >= a.max_x || a.min_y >= a.max_y
        {
            return bad("area".into(), "bounds must be finite with min < max".into());
        }
        self.safety.validate().map_err(|m| IoError::invalid("safety", m))?;
        self.objective.validate().map_err(|m| IoError::invalid("objective", m))?;
        self.loop_config().validate().map_err(|m| IoError::invalid("loop", m))?;
        if self.cells.is_empty() {
            return bad("cells".into(), "at least one cell required".into());
        }
        let bounds = self.bounds();
        let mut ids = BTreeSet::new();
        for (i, c) in self.cells.iter().enumerate() {
            let at = |field: &str| format!("cells[{i}].{field}");
            if !ids.insert(c.id) {
                return bad(at("id"), format!("duplicate cell id {}", c.id));
            }
            if !bounds.contains(Point::new(c.x, c.y)) {
                return bad(at("x"), format!("position ({}, {}) outside area", c.x, c.y));
            }
            let env = &self.safety;
            if !c.tx_power_dbm.is_finite() || c.tx_power_dbm > env.power_max_dbm {
                return bad(
                    at("tx_power_dbm"),
                    format!("{} exceeds envelope max {} dBm", c.tx_power_dbm, env.power_max_dbm),
                );
            }
            if c.tx_power_dbm < env.power_min_dbm {
                return bad(
                    at("tx_power_dbm"),
                    format!("{} below envelope min {} dBm", c.tx_power_dbm, env.power_min_dbm),
                );
            }
            if let Some(m) = c.subband_mask {
                if !m.fits(self.subbands) || m.is_empty() {
                    return bad(at("subband_mask"), format!("{m} is empty or exceeds {} sub-bands", self.subbands));
                }
            }
        }
        if self.cells.iter().filter(|c| c.active).count() < self.safety.min_active_cells as usize {
            return bad("cells".into(), format!("fewer than {} active cells", self.safety.min_active_cells));
        }
        let u = &self.ues;
        if u.count == 0 {
            return bad("ues.count".into(), "at least one UE required".into());
        }
        match u.placement {
            Placement::Explicit if u.positions.len() != u.count as usize => {
                return bad(
                    "ues.positions".into(),
                    format!("{} positions listed for {} UEs", u.positions.len(), u.count),
                );
            }
            Placement::Uniform if !u.positions.is_empty() => {
                return bad("ues.positions".into(), "positions given with uniform placement".into());
            }
            _ => {}
        }
        for (i, p) in u.positions.iter().enumerate() {
            if !bounds.contains(*p) {
                return bad(format!("ues.positions[{i}]"), format!("({}, {}) outside area", p.x, p.y));
            }
        }
        if !(u.mean_offered_load_bps.is_finite() && u.mean_offered_load_bps >= 0.0) {
            return bad("ues.mean_offered_load_bps".into(), "must be finite and non-negative".into());
        }
        if !u.noise_figure_db.is_finite() {
            return bad("ues.noise_figure_db".into(), "must be finite".into());
        }
        for (i, s) in self.traffic.schedule.iter().enumerate() {
            let at = format!("traffic.schedule[{i}]");
            if s.start_tti >= s.end_tti {
                return bad(at, "start_tti must precede end_tti".into());
            }
            if !(s.multiplier.is_finite() && s.multiplier >= 0.0) {
                return bad(at, "multiplier must be finite and non-negative".into());
            }
            if s.ue_id.is_some_and(|id| id >= u.count) {
                return bad(at, format!("ue_id {} out of range", s.ue_id.unwrap_or_default()));
            }
            for (j, t) in self.traffic.schedule.iter().enumerate().take(i) {
                if t.ue_id == s.ue_id && t.start_tti < s.end_tti && s.start_tti < t.end_tti {
                    return bad(at, format!("overlaps traffic.schedule[{j}] for the same target"));
                }
            }
        }
        for (i, f) in self.faults.iter().enumerate() {
            if !ids.contains(&f.cell_id) {
                return bad(format!("faults[{i}].cell_id"), format!("unknown cell {}", f.cell_id));
            }
            if !f.value.is_finite() {
                return bad(format!("faults[{i}].value"), "must be finite".into());
            }
        }
        self.twin_setup().validate().map_err(|e| IoError::invalid("scenario", e.to_string()))
    }
}
