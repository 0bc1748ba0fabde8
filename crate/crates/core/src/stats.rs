//! Small numerical helpers shared by the verification sweeps.

use statrs::distribution::{ContinuousCDF, Normal};

pub fn normal_cdf(x: f64, std: f64) -> f64 {
    Normal::new(0.0, std).expect("positive std").cdf(x)
}

/// Composite Simpson rule with `intervals` (rounded up to even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = (intervals.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

/// Two-sided Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).max((i + 1) as f64 / n - c)
        })
        .fold(0.0, f64::max)
}

/// Standard deviation of an empirical frequency with `n` trials.
pub fn binomial_sd(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Hoeffding half-width for the mean of `n` samples in `[−1, 1]` at
/// confidence `1 − alpha`.
pub fn hoeffding_half_width(n: u64, alpha: f64) -> f64 {
    (2.0 * (2.0 / alpha).ln() / n as f64).sqrt()
}
