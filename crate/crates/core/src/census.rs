//! Counting two-letter automata and the balanced (unitarizable) ones among them.
//!
//! `N_DFA(n) = n^(2n)` and `N_QDFA(n) = (2n)! / 2^n`: a balanced automaton
//! distributes its `2n` labelled arcs over `n` targets, two per target.
//! Their ratio decays like `sqrt(4 pi n) (2/e^2)^n`, and `2/e^2 ~ 0.27`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::automaton::Dfa;
use crate::unitarize::exists_permutation_bruteforce;

/// Samples per independently seeded chunk in [`sample_fraction`].
pub const SAMPLE_CHUNK: u64 = 4096;

/// Largest `n` accepted by [`enumerate`] (`4^8 = 65536` automata).
pub const ENUMERATION_GUARD: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CensusError {
    #[error("n must be at least 1")]
    ZeroStates,
    #[error("at least one sample is required")]
    NoSamples,
    #[error("exhaustive enumeration limited to n <= {guard}, got {n}")]
    GuardExceeded { n: usize, guard: usize },
}

pub fn n_dfa(n: usize) -> BigUint {
    BigUint::from(n).pow(2 * n as u32)
}

pub fn n_qdfa(n: usize) -> BigUint {
    let fact: BigUint = (1..=2 * n as u64).map(BigUint::from).product();
    fact >> n
}

/// Exact fraction of unitarizable automata, with its nearest `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Fraction {
    pub exact: BigRational,
    pub value: f64,
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Doc {
            numerator: String,
            denominator: String,
            value: f64,
        }
        Doc {
            numerator: self.exact.numer().to_string(),
            denominator: self.exact.denom().to_string(),
            value: self.value,
        }
        .serialize(s)
    }
}

pub fn f_qdfa(n: usize) -> Fraction {
    let exact = BigRational::new(BigInt::from(n_qdfa(n)), BigInt::from(n_dfa(n)));
    let value = exact.to_f64().unwrap_or(0.0);
    Fraction { exact, value }
}

/// `sqrt(4 pi n) (2/e^2)^n`, evaluated in log space.
pub fn f_stirling(n: usize) -> f64 {
    let n = n as f64;
    (0.5 * (4.0 * std::f64::consts::PI * n).ln() + n * (2f64.ln() - 2.0)).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleEstimate {
    pub samples: u64,
    pub hits: u64,
    pub fraction: f64,
    pub seed: u64,
    pub generator: &'static str,
}

/// Draws uniform automata and counts the balanced ones.
///
/// Samples are split into chunks of [`SAMPLE_CHUNK`]; chunk `c` uses ChaCha8
/// seeded with `seed_from_u64(seed)` on stream `c`, and draws each arc target
/// with `random_range(0..n)` in `(letter, state)` order. Hits are summed, so
/// the estimate does not depend on how chunks are spread over threads.
pub fn sample_fraction(n: usize, samples: u64, seed: u64) -> Result<SampleEstimate, CensusError> {
    if n == 0 {
        return Err(CensusError::ZeroStates);
    }
    if samples == 0 {
        return Err(CensusError::NoSamples);
    }
    let chunks = samples.div_ceil(SAMPLE_CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let count = SAMPLE_CHUNK.min(samples - c * SAMPLE_CHUNK);
            let mut indegree = vec![0u32; n];
            let mut hits = 0;
            for _ in 0..count {
                indegree.iter_mut().for_each(|d| *d = 0);
                for _ in 0..2 * n {
                    indegree[rng.random_range(0..n)] += 1;
                }
                if indegree.iter().all(|&d| d == 2) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    Ok(SampleEstimate {
        samples,
        hits,
        fraction: hits as f64 / samples as f64,
        seed,
        generator: "chacha8-stream-per-4096",
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Enumeration {
    pub total: u64,
    pub balanced: u64,
    pub realizable: u64,
}

/// Exhaustively enumerates every two-letter automaton on `n` states, counting
/// balanced ones and, independently, those admitting a realizing bijection.
pub fn enumerate(n: usize) -> Result<Enumeration, CensusError> {
    if n == 0 {
        return Err(CensusError::ZeroStates);
    }
    if n > ENUMERATION_GUARD {
        return Err(CensusError::GuardExceeded {
            n,
            guard: ENUMERATION_GUARD,
        });
    }
    let arcs = 2 * n;
    let total = (n as u64).pow(arcs as u32);
    let (balanced, realizable) = (0..total)
        .into_par_iter()
        .map(|code| {
            let dfa = decode(n, code);
            let b = dfa.is_balanced() as u64;
            let r = exists_permutation_bruteforce(&dfa).expect("n within guard") as u64;
            (b, r)
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    Ok(Enumeration {
        total,
        balanced,
        realizable,
    })
}

/// The automaton with index `code` in base-`n` digit order over `(a,0..n), (b,0..n)`.
pub fn decode(n: usize, mut code: u64) -> Dfa {
    let mut rows = vec![vec![0; n]; 2];
    for row in rows.iter_mut() {
        for target in row.iter_mut() {
            *target = (code % n as u64) as usize;
            code /= n as u64;
        }
    }
    let b = rows.pop().unwrap();
    let a = rows.pop().unwrap();
    Dfa::binary(a, b).expect("digits are in range")
}

fn big_decimal<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusReport {
    pub n: usize,
    #[serde(serialize_with = "big_decimal")]
    pub n_dfa: BigUint,
    #[serde(serialize_with = "big_decimal")]
    pub n_qdfa: BigUint,
    pub f_exact: Fraction,
    pub f_stirling: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_estimate: Option<SampleEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub enumeration: Option<Enumeration>,
}

impl CensusReport {
    pub fn new(n: usize) -> Result<Self, CensusError> {
        if n == 0 {
            return Err(CensusError::ZeroStates);
        }
        Ok(Self {
            n,
            n_dfa: n_dfa(n),
            n_qdfa: n_qdfa(n),
            f_exact: f_qdfa(n),
            f_stirling: f_stirling(n),
            sample_estimate: None,
            enumeration: None,
        })
    }

    pub fn with_samples(mut self, samples: u64, seed: u64) -> Result<Self, CensusError> {
        self.sample_estimate = Some(sample_fraction(self.n, samples, seed)?);
        Ok(self)
    }

    pub fn with_enumeration(mut self) -> Result<Self, CensusError> {
        self.enumeration = Some(enumerate(self.n)?);
        Ok(self)
    }
}

/// Exact rational `a / b` with small integers; test and report helper.
pub fn ratio(a: u64, b: u64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}
