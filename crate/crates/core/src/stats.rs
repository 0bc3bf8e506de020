//! Small statistics helpers shared by the experiments.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

/// Observed frequency of a binary event with an exact (Clopper–Pearson)
/// confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialEstimate {
    pub trials: u64,
    pub hits: u64,
    pub frequency: f64,
    pub confidence: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl BinomialEstimate {
    pub fn new(hits: u64, trials: u64, confidence: f64) -> Self {
        let (ci_low, ci_high) = clopper_pearson(hits, trials, confidence);
        Self {
            trials,
            hits,
            frequency: hits as f64 / trials as f64,
            confidence,
            ci_low,
            ci_high,
        }
    }

    pub fn covers(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

/// Exact two-sided binomial interval for `hits` successes in `trials`.
pub fn clopper_pearson(hits: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(trials > 0 && hits <= trials);
    let alpha = 1.0 - confidence;
    let (k, n) = (hits as f64, trials as f64);
    let lo = if hits == 0 {
        0.0
    } else {
        Beta::new(k, n - k + 1.0).expect("valid beta").inverse_cdf(alpha / 2.0)
    };
    let hi = if hits == trials {
        1.0
    } else {
        Beta::new(k + 1.0, n - k).expect("valid beta").inverse_cdf(1.0 - alpha / 2.0)
    };
    (lo, hi)
}

/// Sample mean and unbiased standard deviation.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Linear-interpolated quantile of sorted data (type 7).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Two-sample Kolmogorov–Smirnov statistic and the asymptotic critical value
/// at level `alpha`.
pub fn ks_two_sample(a: &[f64], b: &[f64], alpha: f64) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    (d, c * ((n + m) / (n * m)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clopper_pearson_reference_values() {
        // R: binom.test(5, 20, conf.level = 0.95)$conf.int
        let (lo, hi) = clopper_pearson(5, 20, 0.95);
        assert!((lo - 0.08657147).abs() < 1e-6, "{lo}");
        assert!((hi - 0.49104587).abs() < 1e-6, "{hi}");
        let (lo, hi) = clopper_pearson(0, 10, 0.95);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.3084971).abs() < 1e-6);
        let (lo, hi) = clopper_pearson(10, 10, 0.95);
        assert!((lo - 0.6915029).abs() < 1e-6);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn quantiles_and_moments() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&xs, 0.5), 2.5);
        assert_eq!(quantile_sorted(&xs, 0.0), 1.0);
        assert_eq!(quantile_sorted(&xs, 1.0), 4.0);
        let (m, s) = mean_sd(&xs);
        assert_eq!(m, 2.5);
        assert!((s - 1.2909944).abs() < 1e-6);
    }

    #[test]
    fn ks_identical_and_shifted() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let (d, crit) = ks_two_sample(&a, &a, 0.01);
        assert_eq!(d, 0.0);
        assert!(crit > 0.0);
        let b: Vec<f64> = a.iter().map(|x| x + 50.0).collect();
        assert!((ks_two_sample(&a, &b, 0.01).0 - 0.5).abs() < 1e-12);
    }
}
