//! Interval estimates for Monte Carlo summaries.

use serde::Serialize;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // The edges are exactly 0 and 1 at the extremes; rounding must not move
    // them, since a zero bound is checked against the lower edge.
    let lower = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let upper = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lower, upper)
}

/// Binomial standard error `sqrt(b (1 - b) / trials)` around a reference
/// probability `b`.
pub fn binomial_sigma(b: f64, trials: usize) -> f64 {
    let b = b.clamp(0.0, 1.0);
    (b * (1.0 - b) / trials as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    /// Standard error of the mean.
    pub std_error: f64,
    pub samples: usize,
}

impl MeanEstimate {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return MeanEstimate { mean: f64::NAN, std_error: f64::NAN, samples: 0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        MeanEstimate { mean, std_error: (var / n as f64).sqrt(), samples: n }
    }

    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.mean - z * self.std_error, self.mean + z * self.std_error)
    }
}
