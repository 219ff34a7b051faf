use super::ObserverError;

pub const HOLT_ALPHA: f64 = 0.3;
pub const HOLT_BETA: f64 = 0.1;

/// Holt's linear-trend forecast `horizon` steps past the last sample,
/// floored at zero.
pub fn forecast_load(history: &[f64], horizon: u32) -> Result<f64, ObserverError> {
    forecast_with(history, horizon, HOLT_ALPHA, HOLT_BETA)
}

pub fn forecast_with(history: &[f64], horizon: u32, alpha: f64, beta: f64) -> Result<f64, ObserverError> {
    if history.len() < 2 {
        return Err(ObserverError::InsufficientHistory(history.len()));
    }
    let mut level = history[0];
    let mut trend = history[1] - history[0];
    for &x in &history[1..] {
        let prev = level;
        level = alpha * x + (1.0 - alpha) * (level + trend);
        trend = beta * (level - prev) + (1.0 - beta) * trend;
    }
    Ok((level + f64::from(horizon) * trend).max(0.0))
}
