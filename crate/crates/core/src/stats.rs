//! Binomial proportion summaries.

use serde::Serialize;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Proportion {
    pub successes: usize,
    pub trials: usize,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Proportion {
    /// Rate with a Wilson score interval. `trials` must be positive.
    pub fn new(successes: usize, trials: usize) -> Self {
        assert!(trials > 0 && successes <= trials);
        let (ci_low, ci_high) = wilson_interval(successes, trials, Z95);
        Proportion {
            successes,
            trials,
            rate: successes as f64 / trials as f64,
            ci_low,
            ci_high,
        }
    }

    /// Plug-in binomial standard error `√(r(1 − r)/trials)`.
    pub fn std_error(&self) -> f64 {
        (self.rate * (1.0 - self.rate) / self.trials as f64).sqrt()
    }

    pub fn half_width(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }
}

pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    let nt = trials as f64;
    let r = successes as f64 / nt;
    let z2 = z * z;
    let denom = 1.0 + z2 / nt;
    let center = (r + z2 / (2.0 * nt)) / denom;
    let spread = z * (r * (1.0 - r) / nt + z2 / (4.0 * nt * nt)).sqrt() / denom;
    ((center - spread).max(0.0), (center + spread).min(1.0))
}
