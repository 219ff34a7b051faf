use serde::{Deserialize, Serialize};

/// Operator limits every actuation must respect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SafetyEnvelope {
    pub power_min_dbm: f64,
    pub power_max_dbm: f64,
    /// Largest power change per decision interval, dB.
    pub max_power_step_db: f64,
    /// Every attached UE must keep at least this RSRP after an action.
    pub min_coverage_rsrp_dbm: f64,
    /// Maximum allowed p95 delay predicted by the shadow run, ms.
    pub mad_ms: f64,
    pub min_active_cells: u32,
    /// Relative reward drop that counts as degradation.
    pub degradation_fraction: f64,
    /// Consecutive degraded intervals before rolling back.
    pub degradation_windows: u32,
    /// TTIs simulated per shadow evaluation.
    pub shadow_horizon_ttis: u64,
    /// Reward slack allowed below the running baseline in shadow runs.
    pub shadow_tolerance: f64,
}

impl Default for SafetyEnvelope {
    fn default() -> Self {
        Self {
            power_min_dbm: 0.0,
            power_max_dbm: 46.0,
            max_power_step_db: 3.0,
            min_coverage_rsrp_dbm: -115.0,
            mad_ms: 50.0,
            min_active_cells: 1,
            degradation_fraction: 0.15,
            degradation_windows: 5,
            shadow_horizon_ttis: 500,
            shadow_tolerance: 0.05,
        }
    }
}

impl SafetyEnvelope {
    pub fn validate(&self) -> Result<(), String> {
        let finite = [
            self.power_min_dbm,
            self.power_max_dbm,
            self.max_power_step_db,
            self.min_coverage_rsrp_dbm,
            self.mad_ms,
            self.degradation_fraction,
            self.shadow_tolerance,
        ];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err("all thresholds must be finite".into());
        }
        if self.power_min_dbm > self.power_max_dbm {
            return Err(format!("power_min {} exceeds power_max {}", self.power_min_dbm, self.power_max_dbm));
        }
        if self.max_power_step_db < 0.0 {
            return Err("max_power_step must be non-negative".into());
        }
        if !(self.degradation_fraction > 0.0 && self.degradation_fraction < 1.0) {
            return Err(format!("degradation_fraction {} outside (0, 1)", self.degradation_fraction));
        }
        if self.degradation_windows == 0 {
            return Err("degradation_windows must be at least 1".into());
        }
        if self.shadow_horizon_ttis == 0 {
            return Err("shadow_horizon must be at least 1 TTI".into());
        }
        if self.shadow_tolerance < 0.0 || self.mad_ms <= 0.0 {
            return Err("shadow_tolerance must be ≥ 0 and mad > 0".into());
        }
        Ok(())
    }
}
