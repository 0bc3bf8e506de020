//! Sidon-type k-subsets of `[⌈N/4⌉, ⌊N/2⌋]` and the clique-count statistic R.
//!
//! Any two distinct elements of the interval sum to a value in (N/2, N), so
//! the restricted sumset of a member never wraps and never meets `[1, Q]` for
//! Q < N/2. Under the multiplicative model every such sum therefore carries an
//! independent uniform sign and E[R] = |U|·2^{-k(k-1)/2} exactly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::sign_models::{sample_multiplicative, SignFunction};
use crate::stats::mean_sd;

/// Upper limit on C(interval size, k) for [`enumerate_u`].
pub const MAX_CANDIDATE_SETS: u128 = 10_000_000;

/// All k-subsets A of `[lo, hi]` with |A +̂ A| = k(k-1)/2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UFamily {
    pub n: u64,
    pub k: usize,
    pub lo: u64,
    pub hi: u64,
    /// Members back to back, `k` entries each, in lexicographic order.
    flat: Vec<u32>,
}

impl UFamily {
    pub fn count(&self) -> usize {
        self.flat.len() / self.k
    }

    pub fn members(&self) -> impl ExactSizeIterator<Item = &[u32]> {
        self.flat.chunks_exact(self.k)
    }

    pub fn interval_size(&self) -> u64 {
        self.hi + 1 - self.lo
    }

    /// |U| / C(interval size, k).
    pub fn density(&self) -> f64 {
        self.count() as f64 / binomial(self.interval_size(), self.k as u64) as f64
    }

    /// One JSON array per line.
    pub fn write_jsonl<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        for m in self.members() {
            serde_json::to_writer(&mut w, m)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: std::io::BufRead>(n: u64, k: usize, r: R) -> Result<Self> {
        let (lo, hi) = interval(n);
        let mut flat = Vec::new();
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let m: Vec<u32> = serde_json::from_str(&line)?;
            if m.len() != k {
                return Err(Error::domain(format!("member {m:?} does not have {k} elements")));
            }
            flat.extend(m);
        }
        Ok(Self { n, k, lo, hi, flat })
    }
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `[⌈N/4⌉, ⌊N/2⌋]`.
pub fn interval(n: u64) -> (u64, u64) {
    (n.div_ceil(4), n / 2)
}

pub fn enumerate_u(n: u64, k: usize) -> Result<UFamily> {
    if k < 2 {
        return Err(Error::domain(format!("k = {k} must be at least 2")));
    }
    let (lo, hi) = interval(n);
    let size = (hi + 1).saturating_sub(lo);
    let candidates = binomial(size, k as u64);
    if candidates > MAX_CANDIDATE_SETS {
        return Err(Error::Capacity { what: "candidate k-subsets", requested: candidates, limit: MAX_CANDIDATE_SETS });
    }

    struct Walk {
        lo: u64,
        hi: u64,
        k: usize,
        chosen: Vec<u64>,
        sums: Vec<bool>,
        flat: Vec<u32>,
    }

    impl Walk {
        fn go(&mut self, next: u64) {
            if self.chosen.len() == self.k {
                self.flat.extend(self.chosen.iter().map(|&a| a as u32));
                return;
            }
            let remaining = (self.k - self.chosen.len()) as u64;
            let mut a = next;
            while a + remaining <= self.hi + 1 {
                let fresh = self.chosen.iter().all(|&b| !self.sums[(a + b) as usize]);
                if fresh {
                    for &b in &self.chosen {
                        self.sums[(a + b) as usize] = true;
                    }
                    self.chosen.push(a);
                    self.go(a + 1);
                    self.chosen.pop();
                    for &b in &self.chosen {
                        self.sums[(a + b) as usize] = false;
                    }
                }
                a += 1;
            }
        }
    }

    let mut walk = Walk {
        lo,
        hi,
        k,
        chosen: Vec::with_capacity(k),
        sums: vec![false; 2 * hi as usize + 1],
        flat: Vec::new(),
    };
    let start = walk.lo;
    walk.go(start);
    Ok(UFamily { n, k, lo, hi, flat: walk.flat })
}

/// Members whose restricted sumset lies in {x : f(x) = +1}.
pub fn count_r(f: &SignFunction, u: &UFamily) -> Result<usize> {
    if f.modulus() != u.n {
        return Err(Error::domain(format!("sign function modulus {} != family modulus {}", f.modulus(), u.n)));
    }
    if 2 * f.q() >= u.n {
        return Err(Error::domain(format!("Q = {} must be below N/2", f.q())));
    }
    let n = u.n as usize;
    let positive = |s: usize| f.is_positive(if s >= n { s - n } else { s });
    Ok(u.members()
        .filter(|m| {
            m.iter()
                .enumerate()
                .all(|(i, &a)| m[i + 1..].iter().all(|&b| positive((a + b) as usize)))
        })
        .count())
}

/// |U|·2^{-k(k-1)/2}.
pub fn expected_r(u: &UFamily) -> f64 {
    let pairs = (u.k * (u.k - 1) / 2) as f64;
    u.count() as f64 * (-pairs).exp2()
}

/// Empirical behaviour of R over independent multiplicative samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RStatistics {
    #[serde(rename = "N")]
    pub n: u64,
    pub k: usize,
    #[serde(rename = "Q")]
    pub q: u64,
    pub family_size: usize,
    pub density: f64,
    pub trials: u64,
    pub expected_r: f64,
    pub mean_r: f64,
    pub sd_r: f64,
    /// |mean - E R| / (sd / √trials).
    pub z_score: f64,
    /// Fraction of trials with R ≥ 1.
    pub frequency_positive: f64,
}

/// R for trials `0..trials`; trial t samples with `derive_seed(seed, N, t)`.
pub fn sample_r(u: &UFamily, q: u64, trials: u64, seed: u64) -> Result<Vec<usize>> {
    (0..trials)
        .into_par_iter()
        .map(|t| count_r(&sample_multiplicative(u.n, q, derive_seed(seed, u.n, t))?, u))
        .collect()
}

pub fn r_statistics(u: &UFamily, q: u64, trials: u64, seed: u64) -> Result<RStatistics> {
    if trials == 0 {
        return Err(Error::domain("need at least one trial"));
    }
    let rs = sample_r(u, q, trials, seed)?;
    let xs: Vec<f64> = rs.iter().map(|&r| r as f64).collect();
    let (mean, sd) = mean_sd(&xs);
    let expected = expected_r(u);
    let se = sd / (trials as f64).sqrt();
    Ok(RStatistics {
        n: u.n,
        k: u.k,
        q,
        family_size: u.count(),
        density: u.density(),
        trials,
        expected_r: expected,
        mean_r: mean,
        sd_r: sd,
        z_score: if se > 0.0 { (mean - expected).abs() / se } else { 0.0 },
        frequency_positive: rs.iter().filter(|&&r| r >= 1).count() as f64 / trials as f64,
    })
}
