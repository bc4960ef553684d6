//! Sample moments and Monte Carlo estimates.

use serde::{Deserialize, Serialize};

/// Running count/mean/M2 accumulator. Merging is exact up to rounding, so
/// blocks reduced in a fixed order give bit-identical results regardless of
/// how they were scheduled.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        Moments { n, mean, m2 }
    }

    /// Pairwise reduction of an ordered slice of blocks.
    pub fn merge_all(blocks: &[Moments]) -> Moments {
        match blocks.len() {
            0 => Moments::default(),
            1 => blocks[0],
            len => {
                let (lo, hi) = blocks.split_at(len / 2);
                Moments::merge_all(lo).merge(&Moments::merge_all(hi))
            }
        }
    }

    pub fn from_slice(xs: &[f64]) -> Moments {
        let mut m = Moments::default();
        xs.iter().for_each(|&x| m.push(x));
        m
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// How a root count or expectation was estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Sturm,
    Companion,
    Subdivision,
    RadialRice,
}

/// Monte Carlo mean with its standard error and seed provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_replicates: u64,
    pub seed: u64,
    pub method: Method,
}

impl McEstimate {
    pub fn from_moments(m: &Moments, seed: u64, method: Method) -> McEstimate {
        McEstimate {
            mean: m.mean,
            stderr: m.stderr(),
            n_replicates: m.n,
            seed,
            method,
        }
    }

    /// Two-sided normal-approximation interval `mean ± z·stderr`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.mean - z * self.stderr, self.mean + z * self.stderr)
    }

    /// True when `value` lies within `z` standard errors of the mean.
    pub fn covers(&self, value: f64, z: f64) -> bool {
        (self.mean - value).abs() <= z * self.stderr
    }
}
