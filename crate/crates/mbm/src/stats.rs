//! Interval estimates and two-sample tests.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Two-sided standard normal quantile for a confidence level.
pub fn normal_quantile(level: f64) -> f64 {
    Normal::standard().inverse_cdf(0.5 + level / 2.0)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, n: u64, level: f64) -> (f64, f64) {
    assert!(n >= 1 && successes <= n, "need 0 <= successes <= n and n >= 1");
    let z = normal_quantile(level);
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// A point estimate with its 95% interval, standard error and sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub stderr: f64,
    pub n: u64,
}

impl Estimate {
    /// Proportion with a Wilson interval.
    pub fn proportion(successes: u64, n: u64) -> Self {
        if n == 0 {
            return Self::empty();
        }
        let p = successes as f64 / n as f64;
        let (lo, hi) = wilson_interval(successes, n, 0.95);
        Self {
            value: p,
            lo,
            hi,
            stderr: (p * (1.0 - p) / n as f64).sqrt(),
            n,
        }
    }

    /// Sample mean with a normal-approximation interval.
    pub fn mean(xs: &[f64]) -> Self {
        if xs.is_empty() {
            return Self::empty();
        }
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let se = (var / n).sqrt();
        let z = normal_quantile(0.95);
        Self {
            value: m,
            lo: m - z * se,
            hi: m + z * se,
            stderr: se,
            n: xs.len() as u64,
        }
    }

    fn empty() -> Self {
        Self {
            value: f64::NAN,
            lo: f64::NAN,
            hi: f64::NAN,
            stderr: f64::NAN,
            n: 0,
        }
    }

    /// True if `target` lies within `k` standard errors of the estimate.
    pub fn within_stderr(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n_a: usize,
    pub n_b: usize,
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    assert!(!a.is_empty() && !b.is_empty(), "both samples must be nonempty");
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    KsResult {
        statistic: d,
        p_value: kolmogorov_sf((ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d),
        n_a: a.len(),
        n_b: b.len(),
    }
}

/// `P(K > λ)` for the Kolmogorov distribution.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=200 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub n: usize,
    pub min: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    pub max: f64,
}

impl Quantiles {
    pub fn of(xs: &[f64]) -> Self {
        let mut v = xs.to_vec();
        v.sort_by(f64::total_cmp);
        Self {
            n: v.len(),
            min: v.first().copied().unwrap_or(f64::NAN),
            p50: quantile_sorted(&v, 0.5),
            p90: quantile_sorted(&v, 0.9),
            p99: quantile_sorted(&v, 0.99),
            max: v.last().copied().unwrap_or(f64::NAN),
        }
    }
}
