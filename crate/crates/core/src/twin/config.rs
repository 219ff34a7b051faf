use std::fmt;

use serde::{Deserialize, Serialize};

use super::TwinError;

pub const DEFAULT_POWER_MAX_DBM: f64 = 46.0;
pub const DEFAULT_SUBBANDS: u8 = 4;
pub const MAX_SUBBANDS: u8 = 8;
pub const ALLOWED_PRB_COUNTS: [u32; 6] = [6, 15, 25, 50, 75, 100];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned rectangle `[min, max]` in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: Point,
    pub max: Point,
}

impl Bounds {
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn clip(&self, p: Point) -> Point {
        Point::new(p.x.clamp(self.min.x, self.max.x), p.y.clamp(self.min.y, self.max.y))
    }
}

/// Set of sub-bands a cell transmits on. Bit `i` is sub-band `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubbandMask(u8);

impl SubbandMask {
    pub const fn from_bits(bits: u8) -> Self {
        Self(bits)
    }

    pub fn full(n_subbands: u8) -> Self {
        Self(((1u16 << n_subbands) - 1) as u8)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, subband: usize) -> bool {
        subband < 8 && self.0 & (1 << subband) != 0
    }

    pub fn count(self) -> u32 {
        self.0.count_ones()
    }

    /// True when no bit at or above `n_subbands` is set.
    pub fn fits(self, n_subbands: u8) -> bool {
        u16::from(self.0) < (1u16 << n_subbands)
    }
}

impl fmt::Display for SubbandMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#06b}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellConfig {
    pub cell_id: u32,
    pub position: Point,
    pub tx_power_dbm: f64,
    pub antenna_gain_dbi: f64,
    pub n_prb: u32,
    pub subband_mask: SubbandMask,
    pub active: bool,
    pub idle_power_w: f64,
    /// Transmit-chain power drawn per PRB in use, watts.
    pub per_prb_tx_power_w: f64,
}

impl CellConfig {
    /// PRBs in one sub-band. Fractional when `n_prb` does not split evenly.
    pub fn subband_prbs(&self, n_subbands: u8) -> f64 {
        f64::from(self.n_prb) / f64::from(n_subbands)
    }

    /// PRBs the cell can schedule under its current mask.
    pub fn available_prbs(&self, n_subbands: u8) -> f64 {
        if self.active {
            self.subband_prbs(n_subbands) * f64::from(self.subband_mask.count())
        } else {
            0.0
        }
    }

    pub fn transmits_on(&self, subband: usize) -> bool {
        self.active && self.subband_mask.contains(subband)
    }

    pub fn validate(&self, n_subbands: u8, power_max_dbm: f64) -> Result<(), TwinError> {
        let id = self.cell_id;
        let bad = |msg: String| Err(TwinError::InvalidCell { cell_id: id, reason: msg });
        if !self.tx_power_dbm.is_finite() || self.tx_power_dbm < 0.0 || self.tx_power_dbm > power_max_dbm {
            return bad(format!("tx_power {} outside [0, {power_max_dbm}] dBm", self.tx_power_dbm));
        }
        if !ALLOWED_PRB_COUNTS.contains(&self.n_prb) {
            return bad(format!("n_prb {} not one of {ALLOWED_PRB_COUNTS:?}", self.n_prb));
        }
        if !self.subband_mask.fits(n_subbands) {
            return bad(format!("subband mask {} exceeds {n_subbands} sub-bands", self.subband_mask));
        }
        if self.active && self.subband_mask.is_empty() {
            return bad("active cell with empty subband mask".into());
        }
        if !self.antenna_gain_dbi.is_finite() {
            return bad("antenna gain not finite".into());
        }
        if !(self.idle_power_w >= 0.0) || !(self.per_prb_tx_power_w >= 0.0) {
            return bad("power consumption must be non-negative".into());
        }
        Ok(())
    }
}
