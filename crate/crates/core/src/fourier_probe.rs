//! Exponential sums of a sign function restricted to the window `[-Q, 2Q]`.
//!
//! The windowed signal is g(n) = f(n mod N) for -Q ≤ n ≤ 2Q and 0 elsewhere,
//! with ĝ(θ) = Σ_n g(n) e(-θn) and e(ψ) = exp(2πiψ).
//!
//! [`sup_fourier`] evaluates |ĝ| on the grid θ_j = j·l/(80Q²) and turns the
//! grid maximum into a bound on the true supremum. Every θ ∈ [0, 1] lies
//! within one grid step δ of some θ_j, and |e(α) - 1| ≤ 2π|α| gives
//! |ĝ(θ) - ĝ(θ_j)| ≤ 2πδ·Σ|n| ≤ l/2 for the default constant 80.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::sign_models::{sample_multiplicative, Sign, SignFunction};
use crate::stats::BinomialEstimate;

pub const DEFAULT_GRID_CONSTANT: f64 = 80.0;

/// Samples of g on `[-Q, 2Q]`; index `i` holds g(i - Q).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowedSignal {
    q: u64,
    samples: Vec<Sign>,
}

impl WindowedSignal {
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn samples(&self) -> &[Sign] {
        &self.samples
    }

    /// g(n), zero outside the window.
    pub fn at(&self, n: i64) -> Sign {
        let q = self.q as i64;
        if n < -q || n > 2 * q {
            0
        } else {
            self.samples[(n + q) as usize]
        }
    }

    pub fn from_samples(q: u64, samples: Vec<Sign>) -> Result<Self> {
        if samples.len() as u64 != 3 * q + 1 {
            return Err(Error::domain(format!("window for Q = {q} needs {} samples", 3 * q + 1)));
        }
        Ok(Self { q, samples })
    }

    /// Σ_{n=-Q}^{2Q} |n|.
    fn abs_index_sum(&self) -> f64 {
        let q = self.q as f64;
        q * (q + 1.0) / 2.0 + q * (2.0 * q + 1.0)
    }

    fn nonzero(&self) -> usize {
        self.samples.iter().filter(|&&s| s != 0).count()
    }
}

pub fn window_g(f: &SignFunction) -> Result<WindowedSignal> {
    window_with_q(f, f.q())
}

/// Window of an explicit half-width `q`, for models without their own Q.
pub fn window_with_q(f: &SignFunction, q: u64) -> Result<WindowedSignal> {
    if q < 1 || 2 * q >= f.modulus() {
        return Err(Error::domain(format!(
            "window [-Q, 2Q] with Q = {q} needs 1 <= Q and 2Q < N = {}",
            f.modulus()
        )));
    }
    let qi = q as i64;
    let samples = (-qi..=2 * qi).map(|n| f.at(n)).collect();
    Ok(WindowedSignal { q, samples })
}

fn pairwise_sum(terms: &[Complex64]) -> Complex64 {
    if terms.len() <= 16 {
        return terms.iter().sum();
    }
    let (a, b) = terms.split_at(terms.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// e(-θn) with the phase reduced modulo 1 before scaling by 2π.
#[inline]
fn twiddle(theta: f64, n: i64) -> Complex64 {
    let t = theta * n as f64;
    let frac = t - t.round();
    Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * frac)
}

pub fn fourier_coefficient(g: &WindowedSignal, theta: f64) -> Complex64 {
    let q = g.q as i64;
    let terms: Vec<Complex64> = g
        .samples
        .iter()
        .enumerate()
        .filter(|(_, &s)| s != 0)
        .map(|(i, &s)| twiddle(theta, i as i64 - q) * s as f64)
        .collect();
    pairwise_sum(&terms)
}

/// Grid evaluation of |ĝ| with a certified supremum bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierScan {
    #[serde(rename = "Q")]
    pub q: u64,
    pub l: f64,
    pub grid_step: f64,
    pub grid_max: f64,
    pub argmax_theta: f64,
    pub certified_sup_bound: f64,
}

impl FourierScan {
    pub fn grid_points(&self) -> u64 {
        (1.0 / self.grid_step).floor() as u64 + 1
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Grid spacing l/(c·Q²) and the number of points ⌊c·Q²/l⌋ + 1.
fn grid(q: u64, l: f64, constant: f64) -> (f64, u64) {
    let qf = q as f64;
    let step = l / (constant * qf * qf);
    let last = (constant * qf * qf / l).floor() as u64;
    (step, last + 1)
}

/// Largest |ĝ(θ_j)| and its θ, lowest j on ties.
fn grid_max(g: &WindowedSignal, step: f64, points: u64) -> (f64, f64) {
    let (best_j, best) = (0..points)
        .into_par_iter()
        .map(|j| (j, fourier_coefficient(g, j as f64 * step).norm()))
        .reduce(
            || (u64::MAX, f64::NEG_INFINITY),
            |a, b| match a.1.total_cmp(&b.1) {
                std::cmp::Ordering::Greater => a,
                std::cmp::Ordering::Less => b,
                std::cmp::Ordering::Equal => if a.0 <= b.0 { a } else { b },
            },
        );
    (best, best_j as f64 * step)
}

/// Whether some grid point reaches `level`; stops at the first hit.
fn grid_reaches(g: &WindowedSignal, step: f64, points: u64, level: f64) -> bool {
    (0..points)
        .into_par_iter()
        .any(|j| fourier_coefficient(g, j as f64 * step).norm() >= level)
}

pub fn sup_fourier(g: &WindowedSignal, l: f64) -> Result<FourierScan> {
    sup_fourier_with(g, l, DEFAULT_GRID_CONSTANT)
}

/// [`sup_fourier`] with a custom grid constant. When the constant is too
/// small for the l/2 continuity slack, the bound uses the actual slack.
pub fn sup_fourier_with(g: &WindowedSignal, l: f64, grid_constant: f64) -> Result<FourierScan> {
    if !(l > 0.0 && l <= g.q as f64) {
        return Err(Error::domain(format!("level l = {l} must satisfy 0 < l <= Q = {}", g.q)));
    }
    if !(grid_constant > 0.0) {
        return Err(Error::domain("grid constant must be positive"));
    }
    let (step, points) = grid(g.q, l, grid_constant);
    let (max, argmax) = grid_max(g, step, points);
    let slack = 2.0 * std::f64::consts::PI * step * g.abs_index_sum();
    Ok(FourierScan {
        q: g.q,
        l,
        grid_step: step,
        grid_max: max,
        argmax_theta: argmax,
        certified_sup_bound: max + slack.max(l / 2.0),
    })
}

/// √(|C|·|D|), after checking that g = +1 on all of C + D.
pub fn witness_lower_bound(g: &WindowedSignal, c: &[i64], d: &[i64]) -> Result<f64> {
    let c: std::collections::BTreeSet<i64> = c.iter().copied().collect();
    let d: std::collections::BTreeSet<i64> = d.iter().copied().collect();
    let q = g.q as i64;
    for &x in &c {
        for &y in &d {
            let s = x + y;
            if s < -q || s > 2 * q {
                return Err(Error::domain(format!("{x} + {y} = {s} lies outside [-{q}, {}]", 2 * q)));
            }
            if g.at(s) != 1 {
                return Err(Error::domain(format!("g({s}) = {} is not +1", g.at(s))));
            }
        }
    }
    Ok(((c.len() * d.len()) as f64).sqrt())
}

/// Monte Carlo frequency of {max_j |ĝ(θ_j)| ≥ l} over multiplicative samples.
/// Trial `t` uses seed `derive_seed(seed, N, t)`; the grid uses step
/// l/(80Q²) even when l exceeds Q.
pub fn tail_probability_estimate(n: u64, q: u64, l: f64, trials: u64, seed: u64) -> Result<BinomialEstimate> {
    if trials == 0 {
        return Err(Error::domain("tail estimate needs at least one trial"));
    }
    if !(l > 0.0) {
        return Err(Error::domain(format!("level l = {l} must be positive")));
    }
    let max_possible = (3 * q + 1) as f64;
    let (step, points) = grid(q, l, DEFAULT_GRID_CONSTANT);
    let hits = (0..trials)
        .map(|t| -> Result<bool> {
            if l > max_possible {
                return Ok(false);
            }
            let f = sample_multiplicative(n, q, derive_seed(seed, n, t))?;
            let g = window_g(&f)?;
            Ok(grid_reaches(&g, step, points, l))
        })
        .try_fold(0u64, |acc, hit| hit.map(|h| acc + h as u64))?;
    Ok(BinomialEstimate::new(hits, trials, 0.99))
}

impl WindowedSignal {
    /// Riemann sum of |ĝ|² over `m` equispaced points of [0, 1).
    pub fn l2_norm_sq_riemann(&self, m: usize) -> f64 {
        (0..m)
            .into_par_iter()
            .map(|j| fourier_coefficient(self, j as f64 / m as f64).norm_sqr())
            .sum::<f64>()
            / m as f64
    }

    /// Σ g(n)², the exact value of ∫|ĝ|².
    pub fn energy(&self) -> f64 {
        self.nonzero() as f64
    }
}
