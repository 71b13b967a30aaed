//! Monte Carlo estimates with standard errors and exactly mergeable
//! accumulators.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Binomial,
    DeltaMethod,
    BatchMeans,
}

/// A Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub kind: EstimatorKind,
}

impl Estimate {
    /// Relative standard error of the log (weights for log-log fits).
    pub fn log_std_error(&self) -> f64 {
        if self.mean > 0.0 {
            self.std_error / self.mean
        } else {
            f64::INFINITY
        }
    }
}

/// Counting accumulator for indicator events; merging is exact.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct BinomialAcc {
    pub hits: u64,
    pub n: u64,
}

impl BinomialAcc {
    pub fn push(&mut self, hit: bool) {
        self.hits += hit as u64;
        self.n += 1;
    }

    pub fn merge(&mut self, other: &BinomialAcc) {
        self.hits += other.hits;
        self.n += other.n;
    }

    pub fn estimate(&self) -> Estimate {
        assert!(self.n >= 1, "estimate needs at least one sample");
        let n = self.n as f64;
        let p = self.hits as f64 / n;
        Estimate {
            mean: p,
            std_error: (p * (1.0 - p) / n).sqrt(),
            n_samples: self.n,
            kind: EstimatorKind::Binomial,
        }
    }
}

/// Mean/variance accumulator for real-valued per-sample statistics.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct MeanVarAcc {
    pub sum: f64,
    pub sum_sq: f64,
    pub n: u64,
}

impl MeanVarAcc {
    pub fn push(&mut self, v: f64) {
        self.sum += v;
        self.sum_sq += v * v;
        self.n += 1;
    }

    pub fn merge(&mut self, other: &MeanVarAcc) {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.n += other.n;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    pub fn variance(&self) -> f64 {
        let n = self.n as f64;
        (self.sum_sq / n - self.mean().powi(2)).max(0.0) * n / (n - 1.0).max(1.0)
    }

    pub fn estimate(&self) -> Estimate {
        assert!(self.n >= 1);
        Estimate {
            mean: self.mean(),
            std_error: (self.variance() / self.n as f64).sqrt(),
            n_samples: self.n,
            kind: EstimatorKind::BatchMeans,
        }
    }
}

/// Joint accumulator for a small vector of per-sample statistics: keeps
/// sums and cross products, enough for delta-method error propagation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VectorAcc {
    pub dim: usize,
    pub n: u64,
    pub sums: Vec<f64>,
    /// Row-major dim x dim cross-product sums.
    pub cross: Vec<f64>,
}

impl VectorAcc {
    pub fn new(dim: usize) -> Self {
        VectorAcc { dim, n: 0, sums: vec![0.0; dim], cross: vec![0.0; dim * dim] }
    }

    pub fn push(&mut self, v: &[f64]) {
        debug_assert_eq!(v.len(), self.dim);
        self.n += 1;
        for i in 0..self.dim {
            self.sums[i] += v[i];
            for j in 0..self.dim {
                self.cross[i * self.dim + j] += v[i] * v[j];
            }
        }
    }

    pub fn merge(&mut self, other: &VectorAcc) {
        assert_eq!(self.dim, other.dim);
        self.n += other.n;
        for i in 0..self.dim {
            self.sums[i] += other.sums[i];
        }
        for k in 0..self.cross.len() {
            self.cross[k] += other.cross[k];
        }
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.sums[i] / self.n as f64
    }

    /// Covariance of components i and j (of single samples, not of means).
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        let n = self.n as f64;
        (self.cross[i * self.dim + j] / n - self.mean(i) * self.mean(j)) * n / (n - 1.0).max(1.0)
    }

    /// Delta-method estimate for g(means): standard error from the
    /// gradient and the covariance of the means.
    pub fn delta_method(&self, value: f64, grad: &[f64]) -> Estimate {
        debug_assert_eq!(grad.len(), self.dim);
        let n = self.n as f64;
        let mut var = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                var += grad[i] * grad[j] * self.covariance(i, j);
            }
        }
        Estimate {
            mean: value,
            std_error: (var.max(0.0) / n).sqrt(),
            n_samples: self.n,
            kind: EstimatorKind::DeltaMethod,
        }
    }

    pub fn component_estimate(&self, i: usize) -> Estimate {
        Estimate {
            mean: self.mean(i),
            std_error: (self.covariance(i, i).max(0.0) / self.n as f64).sqrt(),
            n_samples: self.n,
            kind: EstimatorKind::BatchMeans,
        }
    }
}
