//! Estimator statistics: Wilson confidence intervals for binomial proportions
//! and the two-sample Kolmogorov-Smirnov test.

use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// A Monte Carlo probability estimate with its Wilson 95% interval.
///
/// Invariants: `ci_low <= p <= ci_high` and the interval lies inside [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub p: f64,
    pub n: u64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Estimate {
    /// Wilson score interval at 95% from a success count.
    /// Behaves sensibly at p near 0 and 1, where rare-event runs live.
    pub fn from_successes(successes: u64, n: u64) -> Self {
        assert!(n > 0, "estimate requires at least one trial");
        assert!(successes <= n);
        let nf = n as f64;
        let p = successes as f64 / nf;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / nf;
        let center = (p + z2 / (2.0 * nf)) / denom;
        let half = Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
        // At p = 0 or 1 the analytic bound coincides with p; clamp so the
        // bracket invariant survives floating-point rounding.
        Estimate {
            p,
            n,
            ci_low: (center - half).max(0.0).min(p),
            ci_high: (center + half).min(1.0).max(p),
        }
    }

    /// Half-width of the confidence interval.
    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
///
/// Returns (D, p). The p-value uses the Kolmogorov distribution with the
/// standard finite-sample effective size correction; accurate for the sample
/// sizes used here (>= 10^4 per side).
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert!(!xs.is_empty() && !ys.is_empty());
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(|u, v| u.partial_cmp(v).unwrap());
    b.sort_by(|u, v| u.partial_cmp(v).unwrap());
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        let diff = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        if diff > d {
            d = diff;
        }
    }
    let ne = (n as f64 * m as f64) / (n as f64 + m as f64);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, kolmogorov_q(lambda))
}

/// Kolmogorov complementary CDF Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-8 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = sign * (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-12 * sum.abs().max(1e-300) {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Mean and unbiased variance of a sample; helper for CLI summaries.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    assert!(xs.len() > 1);
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}
