use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::AgentError;
use crate::observer::{CellReport, TelemetryReport};
use crate::rng::RngStream;

pub const FEATURE_DIM: usize = 5;
pub const DEFAULT_POLICY_SIGMA_DB: f64 = 1.0;
pub const DEFAULT_ALPHA_ACTOR: f64 = 1e-3;
pub const DEFAULT_ALPHA_CRITIC: f64 = 1e-2;
pub const DEFAULT_AC_GAMMA: f64 = 0.9;

/// Linear Gaussian policy over power deltas with a linear state-value critic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorCriticParams {
    pub theta: Vec<f64>,
    pub w: Vec<f64>,
    pub sigma: f64,
    pub alpha_actor: f64,
    pub alpha_critic: f64,
    pub gamma: f64,
}

impl ActorCriticParams {
    pub fn new(dim: usize) -> Self {
        Self {
            theta: vec![0.0; dim],
            w: vec![0.0; dim],
            sigma: DEFAULT_POLICY_SIGMA_DB,
            alpha_actor: DEFAULT_ALPHA_ACTOR,
            alpha_critic: DEFAULT_ALPHA_CRITIC,
            gamma: DEFAULT_AC_GAMMA,
        }
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    fn check(&self, features: &[f64]) -> Result<(), AgentError> {
        if features.len() != self.theta.len() {
            return Err(AgentError::FeatureDimension { expected: self.theta.len(), got: features.len() });
        }
        Ok(())
    }

    pub fn policy_mean(&self, features: &[f64]) -> Result<f64, AgentError> {
        self.check(features)?;
        Ok(dot(&self.theta, features))
    }

    pub fn value(&self, features: &[f64]) -> Result<f64, AgentError> {
        self.check(features)?;
        Ok(dot(&self.w, features))
    }

    pub fn theta_norm(&self) -> f64 {
        dot(&self.theta, &self.theta).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.theta.iter().chain(&self.w).all(|x| x.is_finite())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `[1, utilisation, SINR/20, power/power_max, fairness]`, each clamped to a
/// small range so a single bad window cannot blow up the weights.
pub fn cell_features(cell: &CellReport, report: &TelemetryReport, power_max_dbm: f64) -> Vec<f64> {
    vec![
        1.0,
        cell.prb_utilization.clamp(0.0, 1.0),
        cell.mean_sinr_db.map_or(1.0, |s| (s / 20.0).clamp(-1.0, 2.0)),
        (cell.tx_power_dbm / power_max_dbm).clamp(0.0, 1.0),
        report.network.jain_fairness.clamp(0.0, 1.0),
    ]
}

/// Samples a power delta (dB) from `Normal(θ·φ, σ)`. The result is not
/// clamped.
pub fn ac_act(params: &ActorCriticParams, features: &[f64], rng: &mut RngStream) -> Result<f64, AgentError> {
    let mean = params.policy_mean(features)?;
    let z: f64 = StandardNormal.sample(rng.rng_mut());
    Ok(mean + params.sigma * z)
}

/// `∇θ log N(a; θ·φ, σ²) = ((a − θ·φ)/σ²)·φ`.
pub fn policy_log_gradient(params: &ActorCriticParams, features: &[f64], action: f64) -> Result<Vec<f64>, AgentError> {
    let mean = params.policy_mean(features)?;
    let score = (action - mean) / (params.sigma * params.sigma);
    Ok(features.iter().map(|f| score * f).collect())
}

/// Log-density of `action` under the current policy.
pub fn policy_log_density(params: &ActorCriticParams, features: &[f64], action: f64) -> Result<f64, AgentError> {
    let mean = params.policy_mean(features)?;
    let var = params.sigma * params.sigma;
    Ok(-0.5 * (action - mean).powi(2) / var - 0.5 * (2.0 * std::f64::consts::PI * var).ln())
}

/// One-step TD(0) actor–critic update. Returns the TD error. Parameters are
/// left untouched if anything would become non-finite.
pub fn ac_update(
    params: &mut ActorCriticParams,
    features: &[f64],
    action: f64,
    reward: f64,
    next_features: &[f64],
) -> Result<f64, AgentError> {
    params.check(next_features)?;
    let v = params.value(features)?;
    let v_next = params.value(next_features)?;
    let delta = reward + params.gamma * v_next - v;
    if !delta.is_finite() || !action.is_finite() {
        return Err(AgentError::Diverged);
    }
    let grad = policy_log_gradient(params, features, action)?;
    let w: Vec<f64> = params.w.iter().zip(features).map(|(w, f)| w + params.alpha_critic * delta * f).collect();
    let theta: Vec<f64> = params.theta.iter().zip(&grad).map(|(t, g)| t + params.alpha_actor * delta * g).collect();
    if w.iter().chain(&theta).any(|x| !x.is_finite()) {
        return Err(AgentError::Diverged);
    }
    params.w = w;
    params.theta = theta;
    Ok(delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi() -> Vec<f64> {
        vec![1.0, 0.4, 0.6, 0.93, 0.8]
    }

    #[test]
    fn degenerate_policy_returns_mean() {
        let mut p = ActorCriticParams::new(FEATURE_DIM);
        p.sigma = 1e-12;
        let mut rng = RngStream::new(1, 6);
        assert!(ac_act(&p, &phi(), &mut rng).unwrap().abs() < 1e-9);
    }

    #[test]
    fn sampling_is_deterministic_per_cursor() {
        let p = ActorCriticParams::new(FEATURE_DIM);
        let mut a = RngStream::new(8, 6);
        let mut b = RngStream::from_cursor(a.cursor());
        assert_eq!(ac_act(&p, &phi(), &mut a).unwrap(), ac_act(&p, &phi(), &mut b).unwrap());
    }

    #[test]
    fn sample_mean_matches_policy_mean() {
        let mut p = ActorCriticParams::new(FEATURE_DIM);
        p.theta = vec![2.0, 0.0, 0.0, 0.0, 0.0];
        let mut rng = RngStream::new(12, 6);
        let n = 100_000;
        let mean = (0..n).map(|_| ac_act(&p, &phi(), &mut rng).unwrap()).sum::<f64>() / n as f64;
        // Standard error is 1/sqrt(1e5) ≈ 0.0032; 0.01 is beyond 3σ.
        assert!((mean - 2.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn dimension_mismatch() {
        let p = ActorCriticParams::new(FEATURE_DIM);
        let mut rng = RngStream::new(1, 6);
        assert_eq!(
            ac_act(&p, &[1.0, 2.0], &mut rng),
            Err(AgentError::FeatureDimension { expected: 5, got: 2 })
        );
    }

    #[test]
    fn action_at_mean_leaves_actor_unchanged() {
        let mut p = ActorCriticParams::new(FEATURE_DIM);
        p.theta = vec![0.1, -0.2, 0.3, 0.0, 0.5];
        let before = p.theta.clone();
        let a = p.policy_mean(&phi()).unwrap();
        ac_update(&mut p, &phi(), a, 1.0, &phi()).unwrap();
        assert_eq!(p.theta, before);
    }

    #[test]
    fn critic_hand_arithmetic() {
        let mut p = ActorCriticParams::new(FEATURE_DIM);
        let delta = ac_update(&mut p, &phi(), 0.7, 1.0, &phi()).unwrap();
        assert_eq!(delta, 1.0);
        let expected: Vec<f64> = phi().iter().map(|f| 0.01 * f).collect();
        assert_eq!(p.w, expected);
    }

    #[test]
    fn zero_td_error_is_fixed_point() {
        let mut p = ActorCriticParams::new(FEATURE_DIM);
        p.theta = vec![0.3; 5];
        let before = p.clone();
        // w = 0 everywhere and r = 0 ⇒ δ = 0.
        let delta = ac_update(&mut p, &phi(), 2.5, 0.0, &phi()).unwrap();
        assert_eq!(delta, 0.0);
        assert_eq!(p, before);
    }

    #[test]
    fn gradient_zero_at_mode_and_linear_in_features() {
        let mut p = ActorCriticParams::new(FEATURE_DIM);
        p.theta = vec![0.5, 0.0, 0.0, 0.0, 0.0];
        let f = phi();
        let g = policy_log_gradient(&p, &f, 0.5).unwrap();
        assert!(g.iter().all(|x| *x == 0.0));

        // With θ = 0 the residual a − θ·φ is fixed, so scaling φ scales ∇.
        let p0 = ActorCriticParams::new(FEATURE_DIM);
        let g1 = policy_log_gradient(&p0, &f, 1.3).unwrap();
        let f3: Vec<f64> = f.iter().map(|x| 3.0 * x).collect();
        let g3 = policy_log_gradient(&p0, &f3, 1.3).unwrap();
        for (a, b) in g1.iter().zip(&g3) {
            assert!((3.0 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn divergence_is_reported_without_mutation() {
        let mut p = ActorCriticParams::new(FEATURE_DIM);
        let before = p.clone();
        assert_eq!(ac_update(&mut p, &phi(), 0.0, f64::INFINITY, &phi()), Err(AgentError::Diverged));
        assert_eq!(p, before);
    }

    #[test]
    fn params_stay_finite_under_long_random_training() {
        let mut p = ActorCriticParams::new(FEATURE_DIM);
        let mut rng = RngStream::new(99, 6);
        for _ in 0..1_000_000 {
            let f: Vec<f64> = (0..FEATURE_DIM).map(|i| if i == 0 { 1.0 } else { rng.uniform_range(-1.0, 2.0) }).collect();
            let f2: Vec<f64> = (0..FEATURE_DIM).map(|i| if i == 0 { 1.0 } else { rng.uniform_range(-1.0, 2.0) }).collect();
            let a = ac_act(&p, &f, &mut rng).unwrap();
            let r = rng.uniform_range(-2.0, 2.5);
            ac_update(&mut p, &f, a, r, &f2).unwrap();
        }
        assert!(p.is_finite());
    }
}
