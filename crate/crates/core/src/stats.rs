//! Small numeric helpers for Monte Carlo aggregation.

/// Pairwise (cascade) summation. The reduction tree depends only on the
/// slice length, so the result is reproducible bit-for-bit.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Sample mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                stderr: f64::NAN,
                samples: 0,
            };
        }
        let mean = pairwise_sum(values) / n as f64;
        let stderr = if n > 1 {
            let squares: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
            (pairwise_sum(&squares) / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            stderr,
            samples: n,
        }
    }
}
