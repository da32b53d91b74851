//! Right-continuous empirical distribution function over integer counts.

use crate::error::{Error, Result};

/// Empirical CDF of a sample of iteration counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    values: Vec<u64>, // sorted
}

impl Ecdf {
    pub fn new(values: &[u64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySamples);
        }
        let mut values = values.to_vec();
        values.sort_unstable();
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty samples
    }

    /// Fraction of samples ≤ `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.values.partition_point(|&v| (v as f64) <= x);
        idx as f64 / self.values.len() as f64
    }

    /// Smallest sample value whose ECDF reaches `q`.
    pub fn quantile(&self, q: f64) -> Result<u64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::OutOfRange {
                name: "q",
                value: q,
                expected: "[0, 1]",
            });
        }
        let n = self.values.len();
        let idx = ((q * n as f64).ceil() as usize)
            .saturating_sub(1)
            .min(n - 1);
        Ok(self.values[idx])
    }

    /// Step points of the ECDF: one `(value, cumulative probability)` pair
    /// per distinct sample value.
    pub fn steps(&self) -> Vec<(u64, f64)> {
        let n = self.values.len() as f64;
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.values.len() {
            let v = self.values[i];
            let mut j = i;
            while j < self.values.len() && self.values[j] == v {
                j += 1;
            }
            out.push((v, j as f64 / n));
            i = j;
        }
        out
    }

    /// Number of flat stretches of the ECDF at least `min_gap` long, i.e.
    /// gaps of that size between consecutive distinct sample values.
    pub fn flat_gaps(&self, min_gap: u64) -> usize {
        let mut count = 0;
        let mut prev: Option<u64> = None;
        for &v in &self.values {
            if let Some(p) = prev {
                if v > p && v - p >= min_gap {
                    count += 1;
                }
            }
            prev = Some(v);
        }
        count
    }
}
