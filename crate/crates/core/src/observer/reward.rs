use serde::{Deserialize, Serialize};

use super::TelemetryReport;

/// Normalised terms are clamped to this many multiples of their reference.
pub const TERM_CAP: f64 = 2.0;

/// Operator objective: weights on each term plus the normalisers that make
/// the terms dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObjectiveWeights {
    pub w_se: f64,
    pub w_fair: f64,
    pub w_lat: f64,
    pub w_energy: f64,
    /// bits/s/Hz
    pub se_ref: f64,
    /// ms
    pub lat_ref: f64,
    /// watts
    pub p_ref: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self { w_se: 1.0, w_fair: 0.5, w_lat: 0.5, w_energy: 0.25, se_ref: 2.0, lat_ref: 50.0, p_ref: 1000.0 }
    }
}

impl ObjectiveWeights {
    pub fn validate(&self) -> Result<(), String> {
        let ws = [self.w_se, self.w_fair, self.w_lat, self.w_energy];
        if ws.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err("weights must be finite and non-negative".into());
        }
        let refs = [self.se_ref, self.lat_ref, self.p_ref];
        if refs.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err("normalisers must be finite and positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardComponents {
    pub se_term: f64,
    pub fairness_term: f64,
    pub latency_penalty: f64,
    pub energy_penalty: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardSignal {
    pub total: f64,
    pub components: RewardComponents,
}

impl RewardSignal {
    pub fn from_components(components: RewardComponents) -> Self {
        let c = components;
        Self { total: c.se_term + c.fairness_term - c.latency_penalty - c.energy_penalty, components }
    }
}

fn normalised(value: f64, reference: f64) -> f64 {
    (value / reference).clamp(0.0, TERM_CAP)
}

pub fn compute_reward(report: &TelemetryReport, weights: &ObjectiveWeights) -> RewardSignal {
    let n = &report.network;
    RewardSignal::from_components(RewardComponents {
        se_term: weights.w_se * normalised(n.spectral_efficiency, weights.se_ref),
        fairness_term: weights.w_fair * n.jain_fairness.clamp(0.0, 1.0),
        latency_penalty: weights.w_lat * normalised(n.p95_delay_ms, weights.lat_ref),
        energy_penalty: weights.w_energy * normalised(n.total_power_w, weights.p_ref),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observer::{NetworkReport, Window};

    fn report(se: f64, jain: f64, p95: f64, power: f64) -> TelemetryReport {
        TelemetryReport {
            window: Window { start_tti: 0, end_tti: 1 },
            cells: vec![],
            network: NetworkReport {
                spectral_efficiency: se,
                jain_fairness: jain,
                p95_delay_ms: p95,
                total_power_w: power,
                throughput_bps: 0.0,
                offered_load_bps: 0.0,
                min_ue_rsrp_dbm: None,
                harq_drops: 0,
            },
        }
    }

    fn w(w_se: f64, w_fair: f64, w_lat: f64, w_energy: f64) -> ObjectiveWeights {
        ObjectiveWeights { w_se, w_fair, w_lat, w_energy, se_ref: 2.0, lat_ref: 40.0, p_ref: 800.0 }
    }

    #[test]
    fn zero_weights_zero_reward() {
        let r = compute_reward(&report(3.0, 0.7, 20.0, 500.0), &w(0.0, 0.0, 0.0, 0.0));
        assert_eq!(r.total, 0.0);
    }

    #[test]
    fn normaliser_identity() {
        let r = compute_reward(&report(2.0, 0.7, 20.0, 500.0), &w(1.0, 0.0, 0.0, 0.0));
        assert_eq!(r.total, 1.0);
    }

    #[test]
    fn all_terms_hand_value() {
        let r = compute_reward(&report(2.0, 0.9, 20.0, 200.0), &w(1.0, 1.0, 1.0, 1.0));
        assert!((r.total - 1.15).abs() < 1e-12);
        let c = r.components;
        assert_eq!(r.total, c.se_term + c.fairness_term - c.latency_penalty - c.energy_penalty);
    }

    #[test]
    fn terms_are_capped() {
        let r = compute_reward(&report(100.0, 1.0, 1e6, 1e9), &w(1.0, 0.0, 1.0, 1.0));
        assert_eq!(r.components.se_term, 2.0);
        assert_eq!(r.components.latency_penalty, 2.0);
        assert_eq!(r.components.energy_penalty, 2.0);
    }

    proptest::proptest! {
        #[test]
        fn monotone_in_se_and_delay(
            se in 0.0f64..10.0, dse in 0.0f64..5.0,
            p95 in 0.0f64..200.0, dp in 0.0f64..100.0,
            jain in 0.0f64..1.0, power in 0.0f64..2000.0,
        ) {
            let weights = ObjectiveWeights::default();
            let base = compute_reward(&report(se, jain, p95, power), &weights).total;
            let more_se = compute_reward(&report(se + dse, jain, p95, power), &weights).total;
            let more_delay = compute_reward(&report(se, jain, p95 + dp, power), &weights).total;
            proptest::prop_assert!(more_se >= base);
            proptest::prop_assert!(more_delay <= base);
        }
    }
}
