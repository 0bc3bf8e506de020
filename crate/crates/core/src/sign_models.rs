//! Sign functions on Z/NZ: the Q-multiplicative random model, the i.i.d.
//! random Cayley model and the quadratic character.
//!
//! Both random models draw one base bit per residue from
//! [`SplitMix64`](crate::rng::SplitMix64): the sign of `x` is +1 iff bit
//! `x % 64` of word `x / 64` is set. The multiplicative model then keeps the
//! base bits at primes `p <= Q` (unless forced by a [`Conditioning`]) and
//! overwrites every composite in `[1, Q]` with the product of its prime
//! signs. Outside `[1, Q]` the two models agree bit for bit for a given seed.

use std::collections::BTreeMap;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::number_theory::{euler_criterion, is_prime};
use crate::rng::SplitMix64;

/// ±1, or 0 for the character at the origin.
pub type Sign = i8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Multiplicative,
    Iid,
    Character,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Multiplicative => "multiplicative",
            Model::Iid => "iid",
            Model::Character => "character",
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multiplicative" | "mult" => Ok(Model::Multiplicative),
            "iid" => Ok(Model::Iid),
            "character" | "char" | "paley" => Ok(Model::Character),
            other => Err(Error::domain(format!("unknown model {other:?}"))),
        }
    }
}

/// Prime signs fixed before multiplicative extension.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conditioning {
    pub forced: BTreeMap<u64, Sign>,
}

impl Conditioning {
    pub fn new() -> Self {
        Self::default()
    }

    /// Forces every prime `p <= q` to +1.
    pub fn all_positive(q: u64) -> Self {
        let forced = (2..=q).filter(|&p| is_prime(p)).map(|p| (p, 1)).collect();
        Self { forced }
    }

    pub fn force(mut self, p: u64, sign: Sign) -> Self {
        self.forced.insert(p, sign);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.forced.is_empty()
    }

    fn validate(&self, q: u64) -> Result<()> {
        for (&p, &s) in &self.forced {
            if p > q || !is_prime(p) {
                return Err(Error::domain(format!("conditioning key {p} is not a prime <= Q = {q}")));
            }
            if s != 1 && s != -1 {
                return Err(Error::domain(format!("conditioning sign {s} for {p} is not ±1")));
            }
        }
        Ok(())
    }
}

/// A sign function on Z/NZ together with the parameters that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignFunction {
    modulus: u64,
    q: u64,
    model: Model,
    seed: Option<u64>,
    forced: Conditioning,
    values: Vec<Sign>,
}

impl SignFunction {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn conditioning(&self) -> &Conditioning {
        &self.forced
    }

    pub fn values(&self) -> &[Sign] {
        &self.values
    }

    /// f(x mod N) for any integer x.
    #[inline]
    pub fn at(&self, x: i64) -> Sign {
        self.values[x.rem_euclid(self.modulus as i64) as usize]
    }

    #[inline]
    pub fn is_positive(&self, x: usize) -> bool {
        self.values[x] == 1
    }

    /// Whether f(p) = +1 for every prime p ≤ Q.
    pub fn small_primes_positive(&self) -> bool {
        (2..=self.q).filter(|&p| is_prime(p)).all(|p| self.values[p as usize] == 1)
    }

    /// Build from raw values. Used by tests and deserialization; no model
    /// invariant beyond value range and length is enforced here.
    pub fn from_parts(
        modulus: u64,
        q: u64,
        model: Model,
        seed: Option<u64>,
        forced: Conditioning,
        values: Vec<Sign>,
    ) -> Result<Self> {
        if values.len() as u64 != modulus {
            return Err(Error::domain(format!("{} values for modulus {modulus}", values.len())));
        }
        if values.iter().any(|v| !(-1..=1).contains(v)) {
            return Err(Error::domain("sign values must lie in {-1, 0, 1}"));
        }
        Ok(Self { modulus, q, model, seed, forced, values })
    }

    /// f ≡ `sign` with the given model tag; used for degenerate test inputs.
    pub fn constant(modulus: u64, q: u64, model: Model, sign: Sign) -> Result<Self> {
        Self::from_parts(modulus, q, model, None, Conditioning::new(), vec![sign; modulus as usize])
    }

    /// Mutable access for tests that deliberately break invariants.
    #[doc(hidden)]
    pub fn values_mut(&mut self) -> &mut [Sign] {
        &mut self.values
    }
}

fn check_modulus(n: u64) -> Result<()> {
    if n < 3 || !is_prime(n) {
        return Err(Error::domain(format!("modulus {n} is not an odd prime")));
    }
    Ok(())
}

fn iid_signs(n: u64, seed: u64) -> Vec<Sign> {
    let words = SplitMix64::new(seed).bit_words(n as usize);
    (0..n as usize)
        .map(|x| if (words[x / 64] >> (x % 64)) & 1 == 1 { 1 } else { -1 })
        .collect()
}

pub fn sample_iid(n: u64, seed: u64) -> Result<SignFunction> {
    check_modulus(n)?;
    Ok(SignFunction {
        modulus: n,
        q: 0,
        model: Model::Iid,
        seed: Some(seed),
        forced: Conditioning::new(),
        values: iid_signs(n, seed),
    })
}

pub fn sample_multiplicative(n: u64, q: u64, seed: u64) -> Result<SignFunction> {
    sample_multiplicative_conditioned(n, q, seed, &Conditioning::new())
}

pub fn sample_multiplicative_conditioned(
    n: u64,
    q: u64,
    seed: u64,
    cond: &Conditioning,
) -> Result<SignFunction> {
    check_modulus(n)?;
    if q < 1 || 2 * q >= n {
        return Err(Error::domain(format!("Q = {q} must satisfy 1 <= Q < N/2 for N = {n}")));
    }
    cond.validate(q)?;

    let mut values = iid_signs(n, seed);
    let q = q as usize;
    // smallest prime factor for 2..=Q
    let mut spf = vec![0usize; q + 1];
    for i in 2..=q {
        if spf[i] == 0 {
            for j in (i..=q).step_by(i) {
                if spf[j] == 0 {
                    spf[j] = i;
                }
            }
        }
    }
    values[1] = 1;
    for x in 2..=q {
        let p = spf[x];
        values[x] = if p == x {
            cond.forced.get(&(x as u64)).copied().unwrap_or(values[x])
        } else {
            values[p] * values[x / p]
        };
    }

    Ok(SignFunction {
        modulus: n,
        q: q as u64,
        model: Model::Multiplicative,
        seed: Some(seed),
        forced: cond.clone(),
        values,
    })
}

/// The quadratic character (·/N), with value 0 at the origin.
pub fn character_function(n: u64) -> Result<SignFunction> {
    check_modulus(n)?;
    let values = (0..n).map(|x| euler_criterion(x, n).value()).collect();
    Ok(SignFunction {
        modulus: n,
        q: 0,
        model: Model::Character,
        seed: None,
        forced: Conditioning::new(),
        values,
    })
}

/// Checks f(ab) = f(a)f(b) for every a, b >= 2 with ab <= Q.
pub fn verify_multiplicativity(f: &SignFunction) -> Result<bool> {
    if f.model != Model::Multiplicative {
        return Err(Error::domain(format!("expected a multiplicative model, got {}", f.model)));
    }
    let q = f.q as usize;
    let v = &f.values;
    Ok((2..=q).all(|a| (2..=q / a).all(|b| v[a * b] == v[a] * v[b])))
}

/// Sign function with a caller-chosen model, used by the harness.
pub fn sample(model: Model, n: u64, q: u64, seed: u64) -> Result<SignFunction> {
    match model {
        Model::Multiplicative => sample_multiplicative(n, q, seed),
        Model::Iid => sample_iid(n, seed),
        Model::Character => character_function(n),
    }
}

/// JSON form of a [`SignFunction`]. Values are bit-packed (bit `x % 8` of
/// byte `x / 8` set iff f(x) = +1) and base64 encoded; the character's zero
/// at the origin is carried separately in `zero_index`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignFunctionJson {
    pub model: Model,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "Q")]
    pub q: u64,
    pub seed: Option<u64>,
    pub forced: BTreeMap<u64, Sign>,
    pub values_base64: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_index: Option<u64>,
}

impl From<&SignFunction> for SignFunctionJson {
    fn from(f: &SignFunction) -> Self {
        let mut bytes = vec![0u8; f.values.len().div_ceil(8)];
        let mut zero_index = None;
        for (x, &v) in f.values.iter().enumerate() {
            match v {
                1 => bytes[x / 8] |= 1 << (x % 8),
                0 => zero_index = Some(x as u64),
                _ => {}
            }
        }
        SignFunctionJson {
            model: f.model,
            n: f.modulus,
            q: f.q,
            seed: f.seed,
            forced: f.forced.forced.clone(),
            values_base64: B64.encode(bytes),
            zero_index,
        }
    }
}

impl TryFrom<SignFunctionJson> for SignFunction {
    type Error = Error;

    fn try_from(j: SignFunctionJson) -> Result<Self> {
        let bytes = B64
            .decode(j.values_base64.as_bytes())
            .map_err(|e| Error::domain(format!("bad values_base64: {e}")))?;
        if bytes.len() as u64 != j.n.div_ceil(8) {
            return Err(Error::domain("values_base64 length does not match N"));
        }
        if j.zero_index.is_some() && j.model != Model::Character {
            return Err(Error::domain("zero_index is only valid for the character model"));
        }
        let mut values: Vec<Sign> = (0..j.n as usize)
            .map(|x| if (bytes[x / 8] >> (x % 8)) & 1 == 1 { 1 } else { -1 })
            .collect();
        if let Some(z) = j.zero_index {
            *values
                .get_mut(z as usize)
                .ok_or_else(|| Error::domain("zero_index out of range"))? = 0;
        }
        SignFunction::from_parts(j.n, j.q, j.model, j.seed, Conditioning { forced: j.forced }, values)
    }
}

impl SignFunction {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SignFunctionJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<SignFunctionJson>(s)?.try_into()
    }
}
