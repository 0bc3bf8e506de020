//! Simulation library for the Q-multiplicative random model of Paley sum
//! graphs.
//!
//! A Q-multiplicative random function is a random sign function on Z/NZ that
//! is completely multiplicative on `[1, Q]` (independent uniform signs at the
//! primes up to `Q`) and independent uniform ±1 everywhere else. The crate
//! samples it next to the i.i.d. random Cayley model and the true quadratic
//! character, builds the sum graphs they generate, computes exact clique
//! numbers, and runs the supporting experiments: Fourier probes on the window
//! `[-Q, 2Q]`, Legendre-symbol pattern statistics, the clique-count
//! expectation identity and a reproducible Monte Carlo harness.
//!
//! All logarithms are base 2.

pub mod bitset;
pub mod cayley_graph;
pub mod clique_solver;
pub mod error;
pub mod fourier_probe;
pub mod harness;
pub mod independence_lab;
pub mod number_theory;
pub mod rng;
pub mod second_moment;
pub mod sign_models;
pub mod stats;

pub use error::{Error, Result};
