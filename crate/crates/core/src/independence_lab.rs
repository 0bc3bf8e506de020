//! Statistics of Legendre-symbol patterns.
//!
//! For a prime p, its symbol vector is ((q/p))_q over the primes q ≤ y. The
//! counting function N(s) is the number of primes y < p ≤ x with vector s.
//! Patterns are stored as π(y)-bit integers: bit i is set iff the i-th prime
//! contributes +1. Characters of {±1}^π(y) are indexed by the same bitmasks,
//! read as squarefree divisors m of the primorial P_y.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::number_theory::{euler_criterion, is_prime, sieve_primes, Symbol};
use crate::rng::SplitMix64;

/// Largest supported π(y).
pub const MAX_PATTERN_BITS: usize = 20;

fn small_primes(y: u64) -> Result<Vec<u64>> {
    let primes = sieve_primes(y)?.primes().to_vec();
    if primes.len() > MAX_PATTERN_BITS {
        return Err(Error::Capacity {
            what: "pattern bits pi(y)",
            requested: primes.len() as u128,
            limit: MAX_PATTERN_BITS as u128,
        });
    }
    Ok(primes)
}

/// Bitmask of the primes q (by position) with (q/p) = +1.
#[inline]
fn residue_mask(p: u64, qs: &[u64]) -> u32 {
    qs.iter()
        .enumerate()
        .filter(|(_, &q)| euler_criterion(q % p, p) == Symbol::Residue)
        .fold(0, |m, (i, _)| m | 1 << i)
}

/// ((q/p))_{q ≤ y} in ascending q.
pub fn symbol_vector(p: u64, y: u64) -> Result<Vec<i8>> {
    if p <= y {
        return Err(Error::domain(format!("p = {p} must exceed y = {y}")));
    }
    if p % 2 == 0 || !is_prime(p) {
        return Err(Error::domain(format!("{p} is not an odd prime")));
    }
    Ok(sieve_primes(y)?
        .iter()
        .map(|q| euler_criterion(q % p, p).value())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub x: u64,
    pub y: u64,
    /// The primes q ≤ y, in bit order.
    pub small_primes: Vec<u64>,
    /// N(s) indexed by pattern bits.
    pub counts: Vec<u64>,
    pub total: u64,
}

impl CountTable {
    pub fn pattern_bits(&self) -> usize {
        self.small_primes.len()
    }

    pub fn count(&self, pattern: &[i8]) -> u64 {
        let idx = pattern
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 1)
            .fold(0usize, |m, (i, _)| m | 1 << i);
        self.counts[idx]
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "pattern,count")?;
        for (s, c) in self.counts.iter().enumerate() {
            writeln!(w, "{},{c}", pattern_string(s, self.pattern_bits()))?;
        }
        Ok(())
    }
}

/// Pattern as a string of `+`/`-`, smallest prime first.
pub fn pattern_string(bits: usize, len: usize) -> String {
    (0..len).map(|i| if bits >> i & 1 == 1 { '+' } else { '-' }).collect()
}

fn check_range(x: u64, y: u64) -> Result<()> {
    if y >= x {
        return Err(Error::domain(format!("y = {y} must be below x = {x}")));
    }
    Ok(())
}

/// N(s) over primes y < p ≤ x.
pub fn count_patterns(x: u64, y: u64) -> Result<CountTable> {
    check_range(x, y)?;
    let qs = small_primes(y)?;
    let primes = sieve_primes(x)?;
    let mut counts = vec![0u64; 1 << qs.len()];
    let mut total = 0;
    for &p in primes.range(y, x) {
        counts[residue_mask(p, &qs) as usize] += 1;
        total += 1;
    }
    Ok(CountTable { x, y, small_primes: qs, counts, total })
}

/// Var_s N(s) with s uniform over all 2^π(y) patterns.
pub fn variance_direct(t: &CountTable) -> f64 {
    let k = t.counts.len() as u128;
    let sum_sq: u128 = t.counts.iter().map(|&c| c as u128 * c as u128).sum();
    let total = t.total as u128;
    // (k·ΣN² - T²) / k² is a non-negative integer over k²
    let num = k * sum_sq - total * total;
    num as f64 / (k * k) as f64
}

/// N̂(m) for every squarefree m | P_y.
#[derive(Debug, Clone, PartialEq)]
pub struct DivisorSpectrum {
    pub y: u64,
    pub small_primes: Vec<u64>,
    /// Indexed by divisor bitmask.
    pub coefficients: Vec<f64>,
}

impl DivisorSpectrum {
    /// The integer m for a bitmask.
    pub fn divisor(&self, mask: usize) -> u128 {
        self.small_primes
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &q)| q as u128)
            .product()
    }

    pub fn coefficient_of(&self, m: u128) -> Option<f64> {
        (0..self.coefficients.len())
            .find(|&mask| self.divisor(mask) == m)
            .map(|mask| self.coefficients[mask])
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "m,n_hat")?;
        for (mask, c) in self.coefficients.iter().enumerate() {
            writeln!(w, "{},{c}", self.divisor(mask))?;
        }
        Ok(())
    }
}

/// N̂(m) = 2^{-π(y)} Σ_{y<p≤x} ∏_{q|m} (q/p), summed prime by prime.
pub fn divisor_spectrum(x: u64, y: u64) -> Result<DivisorSpectrum> {
    check_range(x, y)?;
    let qs = small_primes(y)?;
    let primes = sieve_primes(x)?;
    // bit i set iff (q_i/p) = -1
    let neg: Vec<u32> = primes
        .range(y, x)
        .iter()
        .map(|&p| !residue_mask(p, &qs) & ((1u32 << qs.len()) - 1))
        .collect();
    let scale = (-(qs.len() as f64)).exp2();
    let coefficients = (0..1u32 << qs.len())
        .into_par_iter()
        .map(|m| {
            let s: i64 = neg
                .iter()
                .map(|&n| if (m & n).count_ones() % 2 == 0 { 1 } else { -1 })
                .sum();
            s as f64 * scale
        })
        .collect();
    Ok(DivisorSpectrum { y, small_primes: qs, coefficients })
}

/// Σ_{m ≠ 1} N̂(m)².
pub fn variance_parseval(spec: &DivisorSpectrum) -> Result<f64> {
    let expected = 1usize << spec.small_primes.len();
    if spec.coefficients.len() != expected {
        return Err(Error::domain(format!(
            "spectrum has {} coefficients, expected {expected}",
            spec.coefficients.len()
        )));
    }
    Ok(spec.coefficients[1..].iter().map(|c| c * c).sum())
}

/// N(s) = Σ_m N̂(m) ∏_{q|m} s_q by a fast Walsh–Hadamard transform, rounded.
pub fn reconstruct_counts(spec: &DivisorSpectrum) -> Vec<i64> {
    // Transform in the ±1 basis: pattern bit 1 ↔ s = +1, so flip indices.
    let bits = spec.small_primes.len();
    let full = (1usize << bits) - 1;
    let mut a = spec.coefficients.clone();
    let mut h = 1;
    while h < a.len() {
        for i in (0..a.len()).step_by(2 * h) {
            for j in i..i + h {
                let (u, v) = (a[j], a[j + h]);
                a[j] = u + v;
                a[j + h] = u - v;
            }
        }
        h *= 2;
    }
    // a[t] now holds Σ_m N̂(m)(-1)^{|m∧t|}, where t marks the -1 coordinates.
    (0..a.len()).map(|s| a[!s & full].round() as i64).collect()
}

/// Exact E_v Var_s N(s) when each of the `total` primes draws an independent
/// uniform pattern: 2^{-π(y)}(1 - 2^{-π(y)})·total.
pub fn baseline_variance(x: u64, y: u64) -> Result<f64> {
    if x < 4 {
        return Err(Error::domain(format!("x = {x} below 4")));
    }
    let bits = small_primes(y)?.len();
    let primes = sieve_primes(x)?;
    let total = primes.range(y, x).len() as f64;
    Ok(null_variance(bits, total))
}

fn null_variance(bits: usize, total: f64) -> f64 {
    let k = (-(bits as f64)).exp2();
    k * (1.0 - k) * total
}

/// Var_s N(s) for `draws` tables of `total` i.i.d. uniform patterns.
pub fn null_model_variances(bits: usize, total: u64, draws: usize, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::new(seed);
    (0..draws)
        .map(|_| {
            let mut counts = vec![0u64; 1 << bits];
            for _ in 0..total {
                counts[rng.below(1 << bits) as usize] += 1;
            }
            variance_direct(&CountTable { x: 0, y: 0, small_primes: vec![0; bits], counts, total })
        })
        .collect()
}

/// Primes x < p ≤ 2x with (q/p) = +1 for every prime q ≤ y.
pub fn montgomery_search(x: u64, y: u64) -> Result<Vec<u64>> {
    check_range(x, y)?;
    let qs = sieve_primes(y)?.primes().to_vec();
    let primes = sieve_primes(2 * x)?;
    Ok(primes
        .range(x, 2 * x)
        .iter()
        .copied()
        .filter(|&p| qs.iter().all(|&q| euler_criterion(q % p, p) == Symbol::Residue))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependenceSummary {
    pub x: u64,
    pub y: u64,
    pub pattern_bits: usize,
    pub total: u64,
    pub variance_direct: f64,
    pub variance_parseval: f64,
    pub baseline: f64,
    /// variance_direct / baseline.
    pub ratio: f64,
}

pub fn independence_summary(x: u64, y: u64) -> Result<(IndependenceSummary, CountTable, DivisorSpectrum)> {
    let table = count_patterns(x, y)?;
    let spec = divisor_spectrum(x, y)?;
    let vd = variance_direct(&table);
    let vp = variance_parseval(&spec)?;
    let baseline = null_variance(table.pattern_bits(), table.total as f64);
    let summary = IndependenceSummary {
        x,
        y,
        pattern_bits: table.pattern_bits(),
        total: table.total,
        variance_direct: vd,
        variance_parseval: vp,
        baseline,
        ratio: vd / baseline,
    };
    Ok((summary, table, spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number_theory::least_qnr;

    fn squares_mod(p: u64) -> Vec<u64> {
        (1..p).map(|x| x * x % p).collect()
    }

    fn brute_two_symbols() -> Vec<i8> {
        // (2/p) by square enumeration for the primes 3..19
        [3u64, 5, 7, 11, 13, 17, 19]
            .iter()
            .map(|&p| if squares_mod(p).contains(&2) { 1 } else { -1 })
            .collect()
    }

    #[test]
    fn symbol_vector_examples() {
        assert_eq!(symbol_vector(7, 5).unwrap(), vec![1, -1, -1]);
        assert_eq!(symbol_vector(11, 2).unwrap(), vec![-1]);
        assert_eq!(symbol_vector(101, 30).unwrap().len(), 10);
        assert!(symbol_vector(5, 5).is_err());
        assert!(symbol_vector(9, 5).is_err());
    }

    #[test]
    fn count_patterns_y2() {
        let brute = brute_two_symbols();
        assert_eq!(brute, vec![-1, -1, 1, -1, -1, 1, -1]);
        let t = count_patterns(20, 2).unwrap();
        let plus = brute.iter().filter(|&&s| s == 1).count() as u64;
        assert_eq!(t.counts, vec![7 - plus, plus]);
        assert_eq!(t.total, 7);
        for x in [30u64, 100, 1000] {
            let t = count_patterns(x, 2).unwrap();
            let pi = sieve_primes(x).unwrap().len() as u64;
            assert_eq!(t.counts[0] + t.counts[1], pi - 1);
        }
        assert_eq!(count_patterns(1000, 13).unwrap().counts.iter().sum::<u64>(), count_patterns(1000, 13).unwrap().total);
        assert!(count_patterns(10, 10).is_err());
        assert!(matches!(count_patterns(1000, 80), Err(Error::Capacity { .. })));
    }

    #[test]
    fn variance_direct_examples() {
        let bits = 3;
        let mut counts = vec![0u64; 8];
        counts[5] = 40;
        let t = CountTable { x: 0, y: 0, small_primes: vec![2, 3, 5], counts, total: 40 };
        let k = (-(bits as f64)).exp2();
        let expected = k * 1600.0 - (k * 40.0).powi(2);
        assert!((variance_direct(&t) - expected).abs() < 1e-12);
        let flat = CountTable { x: 0, y: 0, small_primes: vec![2, 3], counts: vec![9; 4], total: 36 };
        assert_eq!(variance_direct(&flat), 0.0);
    }

    #[test]
    fn spectrum_examples() {
        let s = divisor_spectrum(20, 2).unwrap();
        assert_eq!(s.coefficients.len(), 2);
        assert_eq!(s.coefficients[0], 3.5);
        let sum: i64 = brute_two_symbols().iter().map(|&v| v as i64).sum();
        assert_eq!(s.coefficient_of(2), Some(0.5 * sum as f64));

        let s = divisor_spectrum(1000, 13).unwrap();
        assert_eq!(s.coefficients.len(), 64);
        let t = count_patterns(1000, 13).unwrap();
        assert_eq!(s.coefficients[0], t.total as f64 / 64.0);
        assert_eq!(s.divisor(63), 30030);
    }

    #[test]
    fn parseval_small_and_medium() {
        for (x, y) in [(500u64, 7u64), (10_000, 13), (2000, 2), (3000, 19)] {
            let vd = variance_direct(&count_patterns(x, y).unwrap());
            let vp = variance_parseval(&divisor_spectrum(x, y).unwrap()).unwrap();
            assert!((vd - vp).abs() <= 1e-9 * vd.abs().max(1e-300), "({x},{y}): {vd} vs {vp}");
        }
    }

    #[test]
    fn parseval_rejects_incomplete() {
        let mut s = divisor_spectrum(500, 7).unwrap();
        s.coefficients.pop();
        assert!(variance_parseval(&s).is_err());
        let zero = DivisorSpectrum { y: 3, small_primes: vec![2, 3], coefficients: vec![5.0, 0.0, 0.0, 0.0] };
        assert_eq!(variance_parseval(&zero).unwrap(), 0.0);
    }

    #[test]
    fn reconstruction_is_exact() {
        for (x, y) in [(500u64, 7u64), (10_000, 13), (20_000, 17)] {
            let t = count_patterns(x, y).unwrap();
            let back = reconstruct_counts(&divisor_spectrum(x, y).unwrap());
            let counts: Vec<i64> = t.counts.iter().map(|&c| c as i64).collect();
            assert_eq!(back, counts);
        }
    }

    #[test]
    fn baseline_examples() {
        let b = baseline_variance(10_000, 13).unwrap();
        let total = (1229 - 6) as f64;
        assert!((b - total / 64.0 * (63.0 / 64.0)).abs() < 1e-9);
        assert_eq!(baseline_variance(12, 13).unwrap(), 0.0);
        assert!(baseline_variance(3, 1).is_err());
        let big = null_variance(20, 1000.0);
        assert!(big < 1e-3);
    }

    #[test]
    fn montgomery_examples() {
        for p in montgomery_search(10_000, 11).unwrap() {
            assert!(least_qnr(p).unwrap() > 11);
        }
        let got = montgomery_search(500, 2).unwrap();
        let expected: Vec<u64> = sieve_primes(1000)
            .unwrap()
            .range(500, 1000)
            .iter()
            .copied()
            .filter(|p| p % 8 == 1 || p % 8 == 7)
            .collect();
        assert_eq!(got, expected);

        let brute: Vec<u64> = sieve_primes(20_000)
            .unwrap()
            .range(10_000, 20_000)
            .iter()
            .copied()
            .filter(|&p| {
                let sq = squares_mod(p);
                [2u64, 3, 5, 7, 11].iter().all(|q| sq.contains(q))
            })
            .collect();
        assert_eq!(montgomery_search(10_000, 11).unwrap(), brute);
    }

    #[test]
    fn csv_exports() {
        let (summary, table, spec) = independence_summary(500, 5).unwrap();
        assert_eq!(summary.pattern_bits, 3);
        let mut out = Vec::new();
        table.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 9);
        assert!(text.starts_with("pattern,count\n---,"));
        let mut out = Vec::new();
        spec.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.lines().any(|l| l.starts_with("30,")));
    }
}
