//! Counter-mixing 64-bit generator and per-trial seed derivation.
//!
//! The stream is fully specified so that sign functions can be reproduced
//! bit-for-bit by other implementations:
//!
//! * `derive_seed(master, n, trial)` xors the master seed with
//!   `n * 0x9E3779B97F4A7C15` and `trial * 0xBF58476D1CE4E5B9` (wrapping) and
//!   applies [`mix64`].
//! * [`SplitMix64`] starting from a seed `s` emits
//!   `mix64(s + GOLDEN)`, `mix64(s + 2 * GOLDEN)`, ... (wrapping).

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const TRIAL_GAMMA: u64 = 0xBF58_476D_1CE4_E5B9;

/// The splitmix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed for trial `trial` of modulus `n`. Depends on nothing else, so
/// adding trials never changes the seeds of existing ones.
#[inline]
pub fn derive_seed(master: u64, n: u64, trial: u64) -> u64 {
    mix64(master ^ n.wrapping_mul(GOLDEN_GAMMA) ^ trial.wrapping_mul(TRIAL_GAMMA))
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    counter: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { counter: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(GOLDEN_GAMMA);
        mix64(self.counter)
    }

    /// Uniform integer in `0..bound` by rejection (bound > 0).
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let w = self.next_u64();
            if w < zone {
                return w % bound;
            }
        }
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// `len` uniform bits packed little-endian into words: bit `x % 64` of
    /// word `x / 64` is the bit for index `x`.
    pub fn bit_words(&mut self, len: usize) -> Vec<u64> {
        (0..len.div_ceil(64)).map(|_| self.next_u64()).collect()
    }
}
