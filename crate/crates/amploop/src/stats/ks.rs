//! Two-sample Kolmogorov–Smirnov test.

use super::TestResult;
use crate::error::{Error, Result};

/// `D = sup |F_x − F_y|`, computed by a single merge pass over the two
/// sorted samples (ties advance both cursors before the difference is
/// inspected).
pub fn ks_statistic(x: &[u64], y: &[u64]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_unstable();
    ys.sort_unstable();

    let (nx, ny) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < xs.len() || j < ys.len() {
        let v = match (xs.get(i), ys.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        while i < xs.len() && xs[i] == v {
            i += 1;
        }
        while j < ys.len() && ys[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / nx - j as f64 / ny).abs());
    }
    Ok(d)
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value at
/// effective size `mn/(m+n)`.
pub fn ks_two_sample(x: &[u64], y: &[u64]) -> Result<TestResult> {
    let d = ks_statistic(x, y)?;
    let (m, n) = (x.len() as f64, y.len() as f64);
    let effective = m * n / (m + n);
    let lambda = effective.sqrt() * d;
    Ok(TestResult::from_p(d, kolmogorov_survival(lambda)))
}

/// Survival function of the Kolmogorov distribution,
/// `Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} exp(−2 j² λ²)`, with the theta-dual series
/// for small `λ` where the alternating form converges slowly.
fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        // 1 − (√(2π)/λ) Σ_{j≥1} exp(−(2j−1)² π²/(8λ²))
        let mut sum = 0.0;
        for j in 1..=20u32 {
            let k = (2.0 * f64::from(j) - 1.0) * std::f64::consts::PI;
            sum += (-k * k / (8.0 * lambda * lambda)).exp();
        }
        (1.0 - (std::f64::consts::TAU).sqrt() / lambda * sum).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        for j in 1..=200u32 {
            let term = (-2.0 * f64::from(j * j) * lambda * lambda).exp();
            if term < 1e-18 {
                break;
            }
            sum += if j % 2 == 1 { term } else { -term };
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}
