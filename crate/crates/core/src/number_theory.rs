//! Integer arithmetic: sieving, primality, Legendre and Jacobi symbols,
//! quadratic residues and least quadratic nonresidues.
//!
//! Every modulus is below 2^63 and all products go through `u128`, so the
//! results are exact without a bignum dependency.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default ceiling for [`sieve_primes`].
pub const DEFAULT_SIEVE_CAP: u64 = 100_000_000;

/// All primes up to `limit`, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeList {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeList {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.primes.iter().copied()
    }

    /// π(x) for `x <= limit`.
    pub fn pi(&self, x: u64) -> usize {
        assert!(x <= self.limit, "pi({x}) beyond sieve limit {}", self.limit);
        self.primes.partition_point(|&p| p <= x)
    }

    /// Primes in the half-open range `(lo, hi]`.
    pub fn range(&self, lo: u64, hi: u64) -> &[u64] {
        let a = self.primes.partition_point(|&p| p <= lo);
        let b = self.primes.partition_point(|&p| p <= hi);
        &self.primes[a..b.max(a)]
    }

    /// The primorial ∏_{q ≤ y} q, or `None` on overflow.
    pub fn primorial(&self, y: u64) -> Option<u128> {
        self.primes
            .iter()
            .take_while(|&&q| q <= y)
            .try_fold(1u128, |acc, &q| acc.checked_mul(q as u128))
    }
}

pub fn sieve_primes(limit: u64) -> Result<PrimeList> {
    sieve_primes_with_cap(limit, DEFAULT_SIEVE_CAP)
}

/// Sieve of Eratosthenes over odd numbers only.
pub fn sieve_primes_with_cap(limit: u64, cap: u64) -> Result<PrimeList> {
    if limit > cap {
        return Err(Error::Capacity {
            what: "prime sieve limit",
            requested: limit as u128,
            limit: cap as u128,
        });
    }
    if limit < 2 {
        return Ok(PrimeList { limit, primes: Vec::new() });
    }
    // index i stands for 2i + 1
    let half = ((limit - 1) / 2 + 1) as usize;
    let mut composite = vec![false; half];
    composite[0] = true;
    let mut i = 1usize;
    while (2 * i + 1) * (2 * i + 1) <= limit as usize {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = (p * p) / 2;
            while j < half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut primes = Vec::with_capacity(estimate_pi(limit));
    primes.push(2);
    primes.extend(
        composite
            .iter()
            .enumerate()
            .filter(|(_, &c)| !c)
            .map(|(i, _)| 2 * i as u64 + 1),
    );
    Ok(PrimeList { limit, primes })
}

fn estimate_pi(x: u64) -> usize {
    if x < 17 {
        return 8;
    }
    let xf = x as f64;
    (1.26 * xf / xf.ln()) as usize
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin; the base set is a proof for all `n < 2^64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Value of a Legendre or Jacobi symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(i8)]
pub enum Symbol {
    NonResidue = -1,
    Zero = 0,
    Residue = 1,
}

impl Symbol {
    pub fn value(self) -> i8 {
        self as i8
    }

    fn from_sign(v: i8) -> Self {
        match v {
            1 => Symbol::Residue,
            -1 => Symbol::NonResidue,
            _ => Symbol::Zero,
        }
    }
}

fn reduce(a: i64, m: u64) -> u64 {
    (a as i128).rem_euclid(m as i128) as u64
}

/// Legendre symbol (a/p) by Euler's criterion.
pub fn legendre_symbol(a: i64, p: u64) -> Result<Symbol> {
    if p == 2 || p >= 1 << 63 || !is_prime(p) {
        return Err(Error::domain(format!("legendre modulus {p} is not an odd prime")));
    }
    Ok(euler_criterion(reduce(a, p), p))
}

/// Euler's criterion for `a` already reduced modulo the odd prime `p`.
/// Callers iterating over sieved primes use this to skip the primality test.
#[inline]
pub(crate) fn euler_criterion(a: u64, p: u64) -> Symbol {
    if a == 0 {
        return Symbol::Zero;
    }
    match pow_mod(a, (p - 1) / 2, p) {
        1 => Symbol::Residue,
        _ => Symbol::NonResidue,
    }
}

/// Jacobi symbol (a/n) for odd `n >= 1`, by the binary reciprocity algorithm.
pub fn jacobi_symbol(a: i64, n: u64) -> Result<Symbol> {
    if n % 2 == 0 {
        return Err(Error::domain(format!("jacobi modulus {n} is even")));
    }
    let mut a = reduce(a, n);
    let mut n = n;
    let mut t = 1i8;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && (n % 8 == 3 || n % 8 == 5) {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    Ok(if n == 1 { Symbol::from_sign(t) } else { Symbol::Zero })
}

fn require_odd_prime(p: u64) -> Result<()> {
    if p < 3 || p % 2 == 0 || !is_prime(p) {
        return Err(Error::domain(format!("{p} is not an odd prime")));
    }
    Ok(())
}

/// {x² mod p : 1 ≤ x ≤ p-1}.
pub fn quadratic_residues(p: u64) -> Result<BTreeSet<u64>> {
    require_odd_prime(p)?;
    Ok((1..=(p - 1) / 2).map(|x| mul_mod(x, x, p)).collect())
}

/// Smallest `a >= 2` with (a/p) = -1.
pub fn least_qnr(p: u64) -> Result<u64> {
    require_odd_prime(p)?;
    Ok(least_qnr_unchecked(p))
}

pub(crate) fn least_qnr_unchecked(p: u64) -> u64 {
    (2..p)
        .find(|&a| euler_criterion(a, p) == Symbol::NonResidue)
        .expect("every odd prime has a nonresidue below it")
}

/// One row of a least-nonresidue scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LqnrRow {
    pub p: u64,
    pub lqnr: u64,
    /// lqnr / (log₂p · log₂log₂log₂p), when that denominator is positive.
    pub ratio: Option<f64>,
    /// Largest lqnr seen for primes up to and including `p`.
    pub running_max: u64,
}

#[derive(Debug, Clone, Default)]
pub struct LqnrScan {
    pub rows: Vec<LqnrRow>,
}

impl LqnrScan {
    /// Rows where the running maximum strictly increased.
    pub fn record_setters(&self) -> impl Iterator<Item = &LqnrRow> {
        let mut prev = 0;
        self.rows.iter().filter(move |r| {
            let new = r.lqnr > prev;
            prev = prev.max(r.lqnr);
            new
        })
    }

    /// CSV with header `p,lqnr,ratio`; ratio left empty when undefined.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "p,lqnr,ratio")?;
        for r in &self.rows {
            match r.ratio {
                Some(x) => writeln!(w, "{},{},{}", r.p, r.lqnr, x)?,
                None => writeln!(w, "{},{},", r.p, r.lqnr)?,
            }
        }
        Ok(())
    }
}

pub fn lqnr_ratio(p: u64, lqnr: u64) -> Option<f64> {
    let l1 = (p as f64).log2();
    let l3 = l1.log2().log2();
    let denom = l1 * l3;
    (denom.is_finite() && denom > 0.0).then(|| lqnr as f64 / denom)
}

/// Least nonresidue of every odd prime up to `limit`.
pub fn least_qnr_scan(limit: u64) -> Result<LqnrScan> {
    if limit < 7 {
        return Err(Error::domain(format!("scan limit {limit} below 7")));
    }
    let primes = sieve_primes(limit)?;
    let mut running_max = 0;
    let rows = primes
        .iter()
        .skip(1)
        .map(|p| {
            let lqnr = least_qnr_unchecked(p);
            running_max = running_max.max(lqnr);
            LqnrRow { p, lqnr, ratio: lqnr_ratio(p, lqnr), running_max }
        })
        .collect();
    Ok(LqnrScan { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial_division_is_prime(n: u64) -> bool {
        n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    fn squares_mod(p: u64) -> BTreeSet<u64> {
        (1..p).map(|x| x * x % p).collect()
    }

    #[test]
    fn sieve_small_limits() {
        assert_eq!(sieve_primes(10).unwrap().primes(), &[2, 3, 5, 7]);
        assert!(sieve_primes(1).unwrap().is_empty());
        assert!(sieve_primes(0).unwrap().is_empty());
        assert_eq!(sieve_primes(2).unwrap().primes(), &[2]);
        assert_eq!(sieve_primes(3).unwrap().primes(), &[2, 3]);
    }

    #[test]
    fn sieve_matches_trial_division() {
        let expected: Vec<u64> = (0..=100).filter(|&n| trial_division_is_prime(n)).collect();
        assert_eq!(expected.len(), 25);
        assert_eq!(sieve_primes(100).unwrap().primes(), expected.as_slice());

        let big = sieve_primes(20_000).unwrap();
        let expected: Vec<u64> = (0..=20_000).filter(|&n| trial_division_is_prime(n)).collect();
        assert_eq!(big.primes(), expected.as_slice());
    }

    #[test]
    fn sieve_capacity() {
        assert!(matches!(sieve_primes(DEFAULT_SIEVE_CAP + 1), Err(Error::Capacity { .. })));
        assert!(matches!(sieve_primes_with_cap(1000, 999), Err(Error::Capacity { .. })));
    }

    #[test]
    fn pi_and_primorial() {
        let pl = sieve_primes(100).unwrap();
        assert_eq!(pl.pi(13), 6);
        assert_eq!(pl.pi(12), 5);
        assert_eq!(pl.pi(1), 0);
        assert_eq!(pl.primorial(13), Some(30030));
        assert_eq!(pl.primorial(1), Some(1));
        assert_eq!(pl.range(10, 20), &[11, 13, 17, 19]);
    }

    #[test]
    fn miller_rabin_agrees_with_sieve() {
        let pl = sieve_primes(50_000).unwrap();
        let set: BTreeSet<u64> = pl.iter().collect();
        for n in 0..=50_000 {
            assert_eq!(is_prime(n), set.contains(&n), "n = {n}");
        }
        assert!(is_prime(2_305_843_009_213_693_951)); // 2^61 - 1
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to 2,3,5,7
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre_symbol(0, 7).unwrap(), Symbol::Zero);
        assert_eq!(legendre_symbol(3, 7).unwrap(), Symbol::NonResidue);
        assert_eq!(legendre_symbol(-1, 7).unwrap(), Symbol::NonResidue);
        assert_eq!(legendre_symbol(14, 7).unwrap(), Symbol::Zero);
        assert!(legendre_symbol(3, 2).is_err());
        assert!(legendre_symbol(3, 9).is_err());
    }

    #[test]
    fn legendre_matches_square_enumeration() {
        for p in sieve_primes(200).unwrap().iter().skip(1) {
            let sq = squares_mod(p);
            for a in 0..p {
                let expected = if a == 0 {
                    Symbol::Zero
                } else if sq.contains(&a) {
                    Symbol::Residue
                } else {
                    Symbol::NonResidue
                };
                assert_eq!(legendre_symbol(a as i64, p).unwrap(), expected);
            }
        }
    }

    #[test]
    fn jacobi_examples() {
        assert_eq!(jacobi_symbol(1, 9).unwrap(), Symbol::Residue);
        // (2/3)·(2/5) = (-1)(-1)
        let two_3 = if squares_mod(3).contains(&2) { 1 } else { -1 };
        let two_5 = if squares_mod(5).contains(&2) { 1 } else { -1 };
        assert_eq!(jacobi_symbol(2, 15).unwrap().value(), two_3 * two_5);
        assert_eq!(jacobi_symbol(2, 15).unwrap(), Symbol::Residue);
        assert_eq!(jacobi_symbol(3, 7).unwrap(), legendre_symbol(3, 7).unwrap());
        assert_eq!(jacobi_symbol(3, 9).unwrap(), Symbol::Zero);
        assert_eq!(jacobi_symbol(5, 1).unwrap(), Symbol::Residue);
        assert!(jacobi_symbol(1, 8).is_err());
    }

    #[test]
    fn jacobi_equals_legendre_below_ten_thousand() {
        for p in sieve_primes(10_000).unwrap().iter().skip(1) {
            for a in (-3i64..40).chain([p as i64 - 1, p as i64 * 3 + 2]) {
                assert_eq!(jacobi_symbol(a, p).unwrap(), legendre_symbol(a, p).unwrap(), "({a}/{p})");
            }
        }
    }

    #[test]
    fn residue_sets() {
        assert_eq!(quadratic_residues(3).unwrap(), BTreeSet::from([1]));
        assert_eq!(quadratic_residues(7).unwrap(), BTreeSet::from([1, 2, 4]));
        assert_eq!(quadratic_residues(11).unwrap().len(), 5);
        for p in sieve_primes(2000).unwrap().iter().skip(1) {
            assert_eq!(quadratic_residues(p).unwrap().len() as u64, (p - 1) / 2);
        }
        assert!(quadratic_residues(2).is_err());
    }

    #[test]
    fn least_qnr_examples() {
        assert_eq!(least_qnr(3).unwrap(), 2);
        assert_eq!(least_qnr(5).unwrap(), 2);
        assert_eq!(least_qnr(7).unwrap(), 3);
        for p in sieve_primes(5000).unwrap().iter().skip(1) {
            let q = least_qnr(p).unwrap();
            assert!(is_prime(q));
            if p % 8 == 1 || p % 8 == 7 {
                assert!(q >= 3, "p = {p}");
            }
        }
    }

    #[test]
    fn scan_rows_and_csv() {
        let scan = least_qnr_scan(10).unwrap();
        let got: Vec<(u64, u64)> = scan.rows.iter().map(|r| (r.p, r.lqnr)).collect();
        assert_eq!(got, vec![(3, 2), (5, 2), (7, 3)]);
        assert!(scan.rows[0].ratio.is_none());
        assert!(scan.rows[1].ratio.is_some());

        let mut buf = Vec::new();
        scan.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("p,lqnr,ratio"));
        assert_eq!(lines.next(), Some("3,2,"));
        assert!(least_qnr_scan(6).is_err());
    }

    #[test]
    fn scan_running_max_monotone() {
        let scan = least_qnr_scan(3000).unwrap();
        for w in scan.rows.windows(2) {
            assert!(w[0].running_max <= w[1].running_max);
        }
        let setters: Vec<u64> = scan.record_setters().map(|r| r.lqnr).collect();
        assert!(setters.windows(2).all(|w| w[0] < w[1]));
    }

    proptest! {
        #[test]
        fn legendre_multiplicative(a in -5000i64..5000, b in -5000i64..5000, idx in 1usize..1229) {
            let primes = sieve_primes(10_000).unwrap();
            let p = primes.primes()[idx];
            let lhs = legendre_symbol(a * b, p).unwrap().value();
            let rhs = legendre_symbol(a, p).unwrap().value() * legendre_symbol(b, p).unwrap().value();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn squares_are_residues(k in 1i64..1_000_000, idx in 1usize..1229) {
            let p = sieve_primes(10_000).unwrap().primes()[idx];
            prop_assume!(k % p as i64 != 0);
            prop_assert_eq!(legendre_symbol(k * k, p).unwrap(), Symbol::Residue);
        }
    }
}
