//! Batch-means error bars.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub n_batches: usize,
}

impl EstimateWithError {
    /// `|self - exact| <= k * stderr`.
    pub fn within(&self, exact: f64, k: f64) -> bool {
        (self.mean - exact).abs() <= k * self.stderr
    }

    /// Deviation from `exact` in units of the standard error.
    pub fn z_score(&self, exact: f64) -> f64 {
        let d = self.mean - exact;
        if self.stderr > 0.0 {
            d / self.stderr
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(d)
        }
    }

    /// `|a - b| <= k * sqrt(sa^2 + sb^2)`.
    pub fn agrees_with(&self, other: &EstimateWithError, k: f64) -> bool {
        let combined = self.stderr.hypot(other.stderr);
        (self.mean - other.mean).abs() <= k * combined
    }
}

/// A point estimate together with one value per batch. Linear combinations
/// of series built from the same samples keep exact batch-level
/// correlations, so their error bars stay honest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchSeries {
    pub mean: f64,
    pub batches: Vec<f64>,
    pub n_samples: usize,
}

impl BatchSeries {
    pub fn new(mean: f64, batches: Vec<f64>, n_samples: usize) -> BatchSeries {
        BatchSeries {
            mean,
            batches,
            n_samples,
        }
    }

    /// Series whose mean is the plain average of the batch values.
    pub fn from_batches(batches: Vec<f64>, n_samples: usize) -> BatchSeries {
        let mean = batches.iter().sum::<f64>() / batches.len() as f64;
        BatchSeries::new(mean, batches, n_samples)
    }

    pub fn stderr(&self) -> f64 {
        let b = self.batches.len();
        if b < 2 {
            return f64::NAN;
        }
        let avg = self.batches.iter().sum::<f64>() / b as f64;
        let ss: f64 = self.batches.iter().map(|v| (v - avg) * (v - avg)).sum();
        (ss / (b as f64 * (b as f64 - 1.0))).sqrt()
    }

    pub fn estimate(&self) -> EstimateWithError {
        EstimateWithError {
            mean: self.mean,
            stderr: self.stderr(),
            n_samples: self.n_samples,
            n_batches: self.batches.len(),
        }
    }

    /// `constant + sum_i coef_i * series_i`, batch by batch.
    pub fn linear(constant: f64, terms: &[(f64, &BatchSeries)]) -> BatchSeries {
        let first = terms.first().expect("at least one term");
        let nb = first.1.batches.len();
        debug_assert!(terms.iter().all(|(_, s)| s.batches.len() == nb));
        let mut mean = constant;
        let mut batches = vec![constant; nb];
        for (c, s) in terms {
            mean += c * s.mean;
            for (acc, v) in batches.iter_mut().zip(&s.batches) {
                *acc += c * v;
            }
        }
        BatchSeries::new(mean, batches, first.1.n_samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stderr_of_known_batches() {
        let s = BatchSeries::from_batches(vec![1.0, 2.0, 3.0, 4.0], 40);
        assert_eq!(s.mean, 2.5);
        // sample variance 5/3, divided by 4 batches
        assert!((s.stderr() - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        let e = s.estimate();
        assert_eq!((e.n_samples, e.n_batches), (40, 4));
    }

    #[test]
    fn linear_combination_tracks_batches() {
        let a = BatchSeries::from_batches(vec![0.1, 0.3], 10);
        let b = BatchSeries::from_batches(vec![0.2, 0.2], 10);
        let c = BatchSeries::linear(1.0, &[(-1.0, &a), (-1.0, &b)]);
        assert!((c.mean - 0.6).abs() < 1e-15);
        assert!((c.batches[0] - 0.7).abs() < 1e-15);
        assert!((c.batches[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn agreement_rules() {
        let e = EstimateWithError { mean: 1.0, stderr: 0.1, n_samples: 1, n_batches: 2 };
        assert!(e.within(1.29, 3.0));
        assert!(!e.within(1.31, 3.0));
        let f = EstimateWithError { mean: 1.5, stderr: 0.1, n_samples: 1, n_batches: 2 };
        assert!(e.agrees_with(&f, 3.6));
        assert!(!e.agrees_with(&f, 3.5));
        let exact = EstimateWithError { mean: 2.0, stderr: 0.0, n_samples: 1, n_batches: 2 };
        assert_eq!(exact.z_score(2.0), 0.0);
        assert!(exact.z_score(1.0).is_infinite());
    }
}
