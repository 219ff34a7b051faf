//! Link-level radio quantities: propagation, RSRP/RSRQ/SINR, CQI and the
//! truncated-Shannon link abstraction.
//!
//! All conversions run at double precision. Powers carried in dB units are
//! dBm unless the name says otherwise; linear powers are milliwatts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PRB_BANDWIDTH_HZ: f64 = 180_000.0;
pub const SUBCARRIERS_PER_PRB: f64 = 12.0;
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;
/// Distance below which path loss is held constant.
pub const MIN_DISTANCE_M: f64 = 35.0;
/// Upper bound of the link abstraction in bits/s/Hz.
pub const MAX_SPECTRAL_EFFICIENCY: f64 = 5.55;
pub const SHANNON_EFFICIENCY: f64 = 0.75;

/// SINR (dB) at which each CQI 1..=15 becomes usable.
pub const CQI_THRESHOLDS_DB: [f64; 15] = [
    -6.7, -4.7, -2.3, 0.2, 2.4, 4.3, 5.9, 8.1, 10.3, 11.7, 14.1, 16.3, 18.7, 21.0, 22.7,
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RadioError {
    #[error("degenerate power: RSSI must be positive, got {0} mW")]
    DegeneratePower(f64),
    #[error("invalid channel sample: SINR is NaN")]
    InvalidChannelSample,
}

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Urban-macro log-distance path loss in dB.
pub fn path_loss_db(distance_m: f64) -> f64 {
    let d = distance_m.max(MIN_DISTANCE_M);
    128.1 + 37.6 * (d / 1000.0).log10()
}

/// Transmit power on one resource element when `tx_power_dbm` is spread
/// evenly over `n_prb` PRBs.
pub fn per_re_power_dbm(tx_power_dbm: f64, n_prb: u32) -> f64 {
    tx_power_dbm - linear_to_db(SUBCARRIERS_PER_PRB * f64::from(n_prb))
}

/// Transmit power on one PRB.
pub fn per_prb_power_dbm(tx_power_dbm: f64, n_prb: u32) -> f64 {
    tx_power_dbm - linear_to_db(f64::from(n_prb))
}

/// Reference signal received power for one cell/UE link.
pub fn rsrp_dbm(
    tx_power_dbm: f64,
    n_prb: u32,
    antenna_gain_dbi: f64,
    path_loss_db: f64,
    shadowing_db: f64,
) -> f64 {
    per_re_power_dbm(tx_power_dbm, n_prb) + antenna_gain_dbi - path_loss_db - shadowing_db
}

/// `10·log10(n_prb · RSRP / RSSI)` with RSSI the total received power over
/// the measured PRBs.
pub fn rsrq_db(serving_rsrp_dbm: f64, rssi_mw: f64, n_prb: u32) -> Result<f64, RadioError> {
    if !(rssi_mw > 0.0) {
        return Err(RadioError::DegeneratePower(rssi_mw));
    }
    let rsrp_mw = db_to_linear(serving_rsrp_dbm);
    Ok(linear_to_db(f64::from(n_prb.max(1)) * rsrp_mw / rssi_mw))
}

/// Thermal noise over `bandwidth_hz` including the receiver noise figure.
pub fn thermal_noise_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    THERMAL_NOISE_DBM_PER_HZ + linear_to_db(bandwidth_hz) + noise_figure_db
}

/// Thermal noise over a sub-band `prbs` PRBs wide. The width may be
/// fractional when the carrier does not split evenly.
pub fn subband_noise_dbm(prbs: f64, noise_figure_db: f64) -> f64 {
    thermal_noise_dbm(prbs * PRB_BANDWIDTH_HZ, noise_figure_db)
}

/// SINR in dB from linear signal, summed interference and noise (mW).
pub fn sinr_db(signal_mw: f64, interference_mw: f64, noise_mw: f64) -> f64 {
    linear_to_db(signal_mw / (interference_mw + noise_mw))
}

/// Channel quality indicator, 1..=15.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cqi(u8);

impl Cqi {
    pub const MIN: Cqi = Cqi(1);
    pub const MAX: Cqi = Cqi(15);

    pub fn new(value: u8) -> Option<Self> {
        (1..=15).contains(&value).then_some(Cqi(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// Minimum SINR at which this CQI is selected.
    pub fn threshold_db(self) -> f64 {
        CQI_THRESHOLDS_DB[usize::from(self.0 - 1)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CqiReport {
    pub cqi: Cqi,
    /// SINR fell below the lowest threshold.
    pub out_of_range: bool,
}

pub fn map_cqi(sinr_db: f64) -> Result<CqiReport, RadioError> {
    if sinr_db.is_nan() {
        return Err(RadioError::InvalidChannelSample);
    }
    let above = CQI_THRESHOLDS_DB.iter().take_while(|&&t| t <= sinr_db).count();
    Ok(match above {
        0 => CqiReport { cqi: Cqi::MIN, out_of_range: true },
        n => CqiReport { cqi: Cqi(n as u8), out_of_range: false },
    })
}

/// Truncated Shannon: `min(0.75·log2(1 + sinr), 5.55)` bits/s/Hz.
pub fn spectral_efficiency(sinr_db: f64) -> f64 {
    if sinr_db == f64::NEG_INFINITY {
        return 0.0;
    }
    (SHANNON_EFFICIENCY * (1.0 + db_to_linear(sinr_db)).log2()).min(MAX_SPECTRAL_EFFICIENCY)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn path_loss_reference_points() {
        assert!(close(path_loss_db(1000.0), 128.1, 1e-12));
        assert_eq!(path_loss_db(10.0), path_loss_db(35.0));
        assert_eq!(path_loss_db(0.0), path_loss_db(35.0));
        assert!(close(path_loss_db(2000.0), 139.42, 0.005));
    }

    #[test]
    fn rsrp_examples() {
        let per_re = per_re_power_dbm(43.0, 50);
        assert!(close(per_re, 15.22, 0.005));
        assert!(close(rsrp_dbm(43.0, 50, 0.0, 128.1, 0.0), -112.88, 0.005));
        assert!(close(rsrp_dbm(43.0, 50, 0.0, 0.0, 0.0), 15.22, 0.005));
        assert!(close(rsrp_dbm(43.0, 50, 0.0, 128.1, 8.0), -120.88, 0.005));
    }

    #[test]
    fn rsrq_single_loaded_cell_bound() {
        let rsrp = -90.0;
        let n = 50;
        let rssi = f64::from(n) * 12.0 * db_to_linear(rsrp);
        let q = rsrq_db(rsrp, rssi, n).unwrap();
        assert!(close(q, -10.79, 0.01));
        // Any extra interference strictly lowers it.
        assert!(rsrq_db(rsrp, rssi * 1.01, n).unwrap() < q);
        // Scale invariance.
        let q2 = rsrq_db(rsrp + linear_to_db(2.0), rssi * 2.0, n).unwrap();
        assert!(close(q, q2, 1e-9));
    }

    #[test]
    fn rsrq_rejects_zero_rssi() {
        assert!(matches!(rsrq_db(-90.0, 0.0, 50), Err(RadioError::DegeneratePower(_))));
    }

    #[test]
    fn sinr_and_noise() {
        assert!(close(sinr_db(db_to_linear(-100.0), 0.0, db_to_linear(-110.0)), 10.0, 1e-9));
        assert!(close(sinr_db(1.0, 1.0, 0.0), 0.0, 1e-12));
        assert!(close(subband_noise_dbm(50.0 / 4.0, 9.0), -101.48, 0.01));
    }

    #[test]
    fn cqi_table() {
        assert_eq!(map_cqi(10.3).unwrap().cqi.value(), 9);
        let low = map_cqi(-20.0).unwrap();
        assert_eq!(low.cqi.value(), 1);
        assert!(low.out_of_range);
        assert_eq!(map_cqi(40.0).unwrap().cqi.value(), 15);
        assert_eq!(map_cqi(-6.7).unwrap(), CqiReport { cqi: Cqi::MIN, out_of_range: false });
        assert_eq!(map_cqi(f64::NAN), Err(RadioError::InvalidChannelSample));
        for (i, t) in CQI_THRESHOLDS_DB.iter().enumerate() {
            assert_eq!(Cqi::new(i as u8 + 1).unwrap().threshold_db(), *t);
        }
    }

    #[test]
    fn spectral_efficiency_points() {
        assert!(close(spectral_efficiency(0.0), 0.75, 1e-12));
        assert_eq!(spectral_efficiency(f64::NEG_INFINITY), 0.0);
        assert_eq!(spectral_efficiency(30.0), 5.55);
    }

    proptest::proptest! {
        #[test]
        fn path_loss_is_monotone(a in 0.0f64..20_000.0, b in 0.0f64..20_000.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            proptest::prop_assert!(path_loss_db(lo) <= path_loss_db(hi));
        }

        #[test]
        fn cqi_monotone_in_sinr(a in -40.0f64..40.0, b in -40.0f64..40.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            proptest::prop_assert!(map_cqi(lo).unwrap().cqi <= map_cqi(hi).unwrap().cqi);
        }

        #[test]
        fn rsrp_shifts_with_tx_power(tx in 0.0f64..40.0, delta in 0.0f64..6.0, pl in 60.0f64..160.0) {
            let a = rsrp_dbm(tx, 50, 0.0, pl, 0.0);
            let b = rsrp_dbm(tx + delta, 50, 0.0, pl, 0.0);
            proptest::prop_assert!(((b - a) - delta).abs() < 1e-9);
        }
    }
}
