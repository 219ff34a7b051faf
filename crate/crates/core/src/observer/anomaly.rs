use serde::{Deserialize, Serialize};

use super::Window;

pub const DEFAULT_ANOMALY_ALPHA: f64 = 0.05;
pub const DEFAULT_Z_THRESHOLD: f64 = 4.0;
pub const DEFAULT_WARMUP: u32 = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyReport {
    pub metric: String,
    /// `+inf` when the tracked deviation is zero and the sample differs.
    pub z_score: f64,
    pub window: Window,
    pub flagged: bool,
}

/// EWMA mean/variance tracker for one metric stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyTracker {
    pub metric: String,
    pub alpha: f64,
    pub threshold: f64,
    pub warmup: u32,
    /// Lower bound on the deviation used for scoring. Zero disables it.
    pub sigma_floor: f64,
    mean: f64,
    var: f64,
    samples: u32,
}

impl AnomalyTracker {
    pub fn new(metric: impl Into<String>) -> Self {
        Self {
            metric: metric.into(),
            alpha: DEFAULT_ANOMALY_ALPHA,
            threshold: DEFAULT_Z_THRESHOLD,
            warmup: DEFAULT_WARMUP,
            sigma_floor: 0.0,
            mean: 0.0,
            var: 0.0,
            samples: 0,
        }
    }

    pub fn with_sigma_floor(mut self, floor: f64) -> Self {
        self.sigma_floor = floor;
        self
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sigma(&self) -> f64 {
        self.var.sqrt()
    }

    pub fn samples(&self) -> u32 {
        self.samples
    }

    /// Scores `x` against the current estimate, then folds it in.
    pub fn observe(&mut self, x: f64, window: Window) -> AnomalyReport {
        let warmed = self.samples >= self.warmup;
        let sigma = self.sigma().max(self.sigma_floor);
        let dev = (x - self.mean).abs();
        let z = if self.samples == 0 || dev == 0.0 {
            0.0
        } else if sigma == 0.0 {
            f64::INFINITY
        } else {
            dev / sigma
        };
        let report = AnomalyReport { metric: self.metric.clone(), z_score: z, window, flagged: warmed && z > self.threshold };
        self.update(x);
        report
    }

    fn update(&mut self, x: f64) {
        if self.samples == 0 {
            self.mean = x;
            self.var = 0.0;
        } else {
            let diff = x - self.mean;
            let incr = self.alpha * diff;
            self.mean += incr;
            self.var = (1.0 - self.alpha) * (self.var + diff * incr);
        }
        self.samples = self.samples.saturating_add(1);
    }
}
