//! Order-stable summation and sample statistics.

use statrs::distribution::{ContinuousCDF, StudentsT};

/// Pairwise (cascade) summation. The result depends only on the order of
/// `xs`, never on how work was scheduled.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); zero when `n < 2`.
    pub std_dev: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { n, mean: 0.0, std_dev: 0.0 };
        }
        let mean = pairwise_sum(xs) / n as f64;
        let std_dev = if n < 2 {
            0.0
        } else {
            let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
            (pairwise_sum(&sq) / (n - 1) as f64).sqrt()
        };
        Self { n, mean, std_dev }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.std_dev / (self.n as f64).sqrt()
        }
    }

    /// Two-sided 95% Student-t interval for the mean.
    pub fn ci95(&self) -> (f64, f64) {
        if self.n < 2 {
            return (f64::NEG_INFINITY, f64::INFINITY);
        }
        let t = StudentsT::new(0.0, 1.0, (self.n - 1) as f64)
            .map(|d| d.inverse_cdf(0.975))
            .unwrap_or(1.96);
        let half = t * self.std_error();
        (self.mean - half, self.mean + half)
    }
}
