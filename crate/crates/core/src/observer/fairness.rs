use super::ObserverError;

/// Jain's index `(Σx)² / (n·Σx²)`, in `[1/n, 1]`.
pub fn jain_index(throughputs: &[f64]) -> Result<f64, ObserverError> {
    if throughputs.is_empty() {
        return Err(ObserverError::UndefinedFairness("no samples"));
    }
    if throughputs.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(ObserverError::UndefinedFairness("samples must be finite and non-negative"));
    }
    let sum: f64 = throughputs.iter().sum();
    let sum_sq: f64 = throughputs.iter().map(|x| x * x).sum();
    if sum_sq == 0.0 {
        return Err(ObserverError::UndefinedFairness("all samples zero"));
    }
    let j = sum * sum / (throughputs.len() as f64 * sum_sq);
    Ok(j.min(1.0))
}
