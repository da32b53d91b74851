//! Two-sample Anderson–Darling test, rank-based with the midrank tie
//! correction (iteration counts are integers, so ties are the norm).
//!
//! The statistic is standardized as `T = (A² − 1) / σ_N` with the exact
//! null variance of the k-sample formulation (k = 2), and the p-value is
//! interpolated through the published percentile table for the standardized
//! statistic.

use super::TestResult;
use crate::error::{Error, Result};

/// Published two-sample percentiles of the standardized statistic:
/// `(t, significance)` pairs used for the log-quadratic p-value fit.
#[allow(clippy::approx_constant)] // 2.718 is the tabulated 2.5% point, not e
const PERCENTILES: [(f64, f64); 7] = [
    (0.325, 0.25),
    (1.226, 0.10),
    (1.961, 0.05),
    (2.718, 0.025),
    (3.752, 0.01),
    (4.592, 0.005),
    (6.546, 0.001),
];

/// Two-sample Anderson–Darling test. `statistic` is the standardized `T`;
/// rejection is decided at the 1% significance level.
pub fn ad_two_sample(x: &[u64], y: &[u64]) -> Result<TestResult> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySamples);
    }
    let a2 = midrank_statistic(x, y);
    let sigma = null_variance(x.len(), y.len()).sqrt();
    let t = (a2 - 1.0) / sigma;
    Ok(TestResult::from_p(t, p_value_from_t(t)))
}

/// Tie-corrected (midrank) two-sample statistic `A²`.
fn midrank_statistic(x: &[u64], y: &[u64]) -> f64 {
    let mut pooled: Vec<u64> = x.iter().chain(y.iter()).copied().collect();
    pooled.sort_unstable();

    // distinct pooled values with multiplicities
    let mut distinct: Vec<(u64, f64)> = Vec::new();
    for &v in &pooled {
        match distinct.last_mut() {
            Some((val, mult)) if *val == v => *mult += 1.0,
            _ => distinct.push((v, 1.0)),
        }
    }

    let big_n = pooled.len() as f64;
    let samples: [&[u64]; 2] = [x, y];
    let mut a2 = 0.0;
    for sample in samples {
        let mut sorted: Vec<u64> = sample.to_vec();
        sorted.sort_unstable();
        let n_i = sorted.len() as f64;

        let mut cursor = 0usize; // walks the sorted sample
        let mut seen = 0.0f64; // sample values strictly before this block
        let mut pooled_seen = 0.0f64;
        let mut inner = 0.0;
        for &(value, mult) in &distinct {
            let mut here = 0.0;
            while cursor < sorted.len() && sorted[cursor] == value {
                here += 1.0;
                cursor += 1;
            }
            let m_ij = seen + here / 2.0; // midrank count for this sample
            let b_j = pooled_seen + mult / 2.0; // midrank count in the pool
            let denom = b_j * (big_n - b_j) - big_n * mult / 4.0;
            if denom > 0.0 {
                let dev = big_n * m_ij - n_i * b_j;
                inner += mult / big_n * dev * dev / denom;
            }
            seen += here;
            pooled_seen += mult;
        }
        a2 += inner / n_i;
    }
    a2 * (big_n - 1.0) / big_n
}

/// Exact variance of `A²` under the null for two samples of sizes `n1`,
/// `n2`, via the harmonic-sum closed form of the k-sample theory.
fn null_variance(n1: usize, n2: usize) -> f64 {
    let k = 2.0f64;
    let big_n = (n1 + n2) as f64;
    let h_cap = 1.0 / n1 as f64 + 1.0 / n2 as f64;

    let n = n1 + n2;
    // h = Σ_{i=1}^{N-1} 1/i, and prefix sums for the double harmonic term
    let mut harmonic = vec![0.0f64; n];
    for i in 1..n {
        harmonic[i] = harmonic[i - 1] + 1.0 / i as f64;
    }
    let h = harmonic[n - 1];
    // g = Σ_{i=1}^{N-2} (h(N−1) − h(i)) / (N − i)
    let mut g = 0.0;
    for i in 1..=(n - 2) {
        g += (harmonic[n - 1] - harmonic[i]) / (n - i) as f64;
    }

    let a = (4.0 * g - 6.0) * (k - 1.0) + (10.0 - 6.0 * g) * h_cap;
    let b = (2.0 * g - 4.0) * k * k + 8.0 * h * k + (2.0 * g - 14.0 * h - 4.0) * h_cap - 8.0 * h
        + 4.0 * g
        - 6.0;
    let c = (6.0 * h + 2.0 * g - 2.0) * k * k
        + (4.0 * h - 4.0 * g + 6.0) * k
        + (2.0 * h - 6.0) * h_cap
        + 4.0 * h;
    let d = (2.0 * h + 6.0) * k * k - 4.0 * h * k;

    (a * big_n.powi(3) + b * big_n.powi(2) + c * big_n + d)
        / ((big_n - 1.0) * (big_n - 2.0) * (big_n - 3.0))
}

/// Interpolates `ln(significance)` quadratically through the percentile
/// table and evaluates at `t`. Beyond the table the quadratic is monotone
/// decreasing up to its vertex, where the value is frozen.
fn p_value_from_t(t: f64) -> f64 {
    let (c0, c1, c2) = log_quadratic_fit();
    let t_eval = if c2 > 0.0 { t.min(-c1 / (2.0 * c2)) } else { t };
    (c0 + c1 * t_eval + c2 * t_eval * t_eval).exp().min(1.0)
}

/// Least-squares quadratic through the seven `(t, ln sig)` points.
fn log_quadratic_fit() -> (f64, f64, f64) {
    // normal equations for the 3-parameter fit
    let mut s = [0.0f64; 5]; // Σ t^0 .. Σ t^4
    let mut r = [0.0f64; 3]; // Σ y t^0 .. Σ y t^2
    for &(t, sig) in &PERCENTILES {
        let y = sig.ln();
        let mut tp = 1.0;
        for (p, slot) in s.iter_mut().enumerate() {
            *slot += tp;
            if p < 3 {
                r[p] += y * tp;
            }
            tp *= t;
        }
    }
    let m = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    let det = |a: &[[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let d = det(&m);
    let mut cols = [m; 3];
    for (i, col) in cols.iter_mut().enumerate() {
        for row in 0..3 {
            col[row][i] = r[row];
        }
    }
    (det(&cols[0]) / d, det(&cols[1]) / d, det(&cols[2]) / d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identical_samples_never_reject() {
        // with x == y the midrank deviations cancel exactly
        let x = [3u64, 3, 5, 8, 8, 13, 21, 21];
        let a2 = midrank_statistic(&x, &x);
        assert_abs_diff_eq!(a2, 0.0, epsilon = 1e-12);
        let r = ad_two_sample(&x, &x).unwrap();
        assert!(r.statistic < 0.0);
        assert!(!r.reject_at_1pct);
    }

    #[test]
    fn reference_statistic_with_ties() {
        // frozen with an independent implementation of the midrank formula
        let x = [1u64, 1, 2, 3, 5, 7, 7, 8];
        let y = [2u64, 2, 3, 4, 6, 9];
        let a2 = midrank_statistic(&x, &y);
        assert_abs_diff_eq!(a2, 0.5279469115776865, epsilon = 1e-12);
        let sigma = null_variance(x.len(), y.len()).sqrt();
        assert_abs_diff_eq!(sigma, 0.67069389671466, epsilon = 1e-12);
        let r = ad_two_sample(&x, &y).unwrap();
        assert_abs_diff_eq!(r.statistic, -0.7038279172281536, epsilon = 1e-10);
        assert!(!r.reject_at_1pct);
    }

    #[test]
    fn p_value_anchored_at_table() {
        // the fit reproduces the 1% row of the table almost exactly
        let p = p_value_from_t(3.752);
        assert_abs_diff_eq!(p, 0.01, epsilon = 2e-4);
        assert!(p_value_from_t(6.546) <= 0.0011);
        assert!(p_value_from_t(-1.0) > 0.5);
        // far beyond the table the value stays small and monotone
        assert!(p_value_from_t(30.0) < 1e-6);
        assert!(p_value_from_t(50.0) <= p_value_from_t(30.0) + 1e-12);
    }

    #[test]
    fn separated_samples_reject() {
        let x: Vec<u64> = (0..200).collect();
        let y: Vec<u64> = (150..350).collect();
        let r = ad_two_sample(&x, &y).unwrap();
        assert!(r.statistic > 3.752);
        assert!(r.reject_at_1pct);
    }
}
