use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::clique_solver::SearchBudget;
use crate::error::{Error, Result};
use crate::number_theory::is_prime;
use crate::sign_models::Model;

/// Coefficient of the default Q rule.
pub const DEFAULT_C: f64 = 0.25;
/// Largest N solved exactly by default; larger graphs get greedy + coloring bound.
pub const DEFAULT_EXACT_LIMIT: u64 = 4096;
pub const DEFAULT_GREEDY_RESTARTS: usize = 64;

/// Q = max(1, round(c·log₂N·log₂log₂N)).
pub fn q_rule(n: u64, c: f64) -> u64 {
    let l = (n as f64).log2();
    let ll = l.log2().max(0.0);
    ((c * l * ll).round() as u64).max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub primes: Vec<u64>,
    pub models: Vec<Model>,
    /// Q rule coefficient, in (0, 1/2).
    pub c: f64,
    #[serde(rename = "Q")]
    pub q_override: Option<u64>,
    pub trials: u64,
    pub master_seed: u64,
    pub epsilon: f64,
    pub max_nodes: Option<u64>,
    pub time_limit_ms: Option<u64>,
    pub exact_limit: u64,
    pub greedy_restarts: usize,
    /// Write wall-clock timings into records. Off by default so that
    /// identical configurations produce identical files.
    pub record_timings: bool,
    /// Also run the exact solver on the forced all-positive sample.
    pub solve_forced: bool,
    pub output_path: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            primes: vec![1009],
            models: vec![Model::Multiplicative, Model::Iid],
            c: DEFAULT_C,
            q_override: None,
            trials: 10,
            master_seed: 0,
            epsilon: 0.5,
            max_nodes: None,
            time_limit_ms: None,
            exact_limit: DEFAULT_EXACT_LIMIT,
            greedy_restarts: DEFAULT_GREEDY_RESTARTS,
            record_timings: false,
            solve_forced: true,
            output_path: None,
        }
    }
}

impl ExperimentConfig {
    pub fn q_for(&self, n: u64) -> u64 {
        self.q_override.unwrap_or_else(|| q_rule(n, self.c))
    }

    pub fn budget(&self) -> SearchBudget {
        SearchBudget {
            max_nodes: self.max_nodes,
            time_limit: self.time_limit_ms.map(Duration::from_millis),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::domain("trials must be at least 1"));
        }
        if self.primes.is_empty() {
            return Err(Error::domain("no primes given"));
        }
        if self.models.is_empty() {
            return Err(Error::domain("no models given"));
        }
        if !(self.c > 0.0 && self.c < 0.5) {
            return Err(Error::domain(format!("c = {} must lie in (0, 0.5)", self.c)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::domain(format!("epsilon = {} must be positive", self.epsilon)));
        }
        for &n in &self.primes {
            if n < 3 || !is_prime(n) {
                return Err(Error::domain(format!("{n} is not an odd prime")));
            }
            let q = self.q_for(n);
            if q < 1 || 2 * q >= n {
                return Err(Error::domain(format!("Q = {q} violates 1 <= Q < N/2 for N = {n}")));
            }
        }
        Ok(())
    }
}
