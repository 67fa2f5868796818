//! Synthesis of automata that write a requested state into the register.
//!
//! Given target strings `w_i` with coefficients `c_i` and a fixed input word,
//! we build an automaton whose run from `sum_i c_i |branch_i>` leaves
//! `(sum_i c_i |w_i>) ⊗ |final>`. States are the nodes of a suffix-merge trie:
//! at level `t` there is one state per distinct remaining output `w_i[t+1..k]`.
//! Step `t` maps `(input[t], node of w[t..k])` to `(w[t], node of w[t+1..k])`,
//! which is injective because distinct images differ in the letter or the
//! remaining suffix. The partial map is completed lexicographically.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::automaton::Dfa;
use crate::qsim::{run_final, QsimError, Register, RegisterState, SparseState};
use crate::unitarize::{verify_realizes, JointPerm, Letter, Pair};
use crate::SCHEMA_VERSION;

/// Amplitude tolerance of [`verify_synthesis`].
pub const SYNTH_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("target has no terms")]
    NoTerms,
    #[error("target string {0:?} listed more than once")]
    DuplicateString(String),
    #[error("target strings have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("input word has length {word}, targets have length {k}")]
    WordLength { word: usize, k: usize },
    #[error("coefficients have norm {0}, expected 1")]
    NotNormalized(f64),
    #[error("malformed target file: {0}")]
    Syntax(String),
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

/// Target register state and the classical word fed to the automaton.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    k: usize,
    terms: Vec<(Register, Complex64)>,
    input_word: Register,
}

impl TargetSpec {
    /// `input_word` defaults to all `b`.
    pub fn new(terms: &[(&str, Complex64)], input_word: Option<&str>) -> Result<Self, SynthError> {
        let parsed = terms
            .iter()
            .map(|&(s, c)| Ok((Register::parse(s)?, c)))
            .collect::<Result<Vec<_>, SynthError>>()?;
        let word = input_word.map(Register::parse).transpose()?;
        Self::from_registers(parsed, word)
    }

    pub fn from_registers(
        terms: Vec<(Register, Complex64)>,
        input_word: Option<Register>,
    ) -> Result<Self, SynthError> {
        let k = terms.first().ok_or(SynthError::NoTerms)?.0.len();
        if k == 0 {
            return Err(SynthError::LengthMismatch(0, 0));
        }
        let mut seen = BTreeSet::new();
        for (r, _) in &terms {
            if r.len() != k {
                return Err(SynthError::LengthMismatch(k, r.len()));
            }
            if !seen.insert(r.clone()) {
                return Err(SynthError::DuplicateString(r.to_string()));
            }
        }
        let norm: f64 = terms.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(SynthError::NotNormalized(norm));
        }
        let input_word = input_word.unwrap_or_else(|| Register::uniform(k, Letter::B));
        if input_word.len() != k {
            return Err(SynthError::WordLength {
                word: input_word.len(),
                k,
            });
        }
        Ok(Self {
            k,
            terms,
            input_word,
        })
    }

    /// Same strings with equal positive weights.
    pub fn uniform(strings: &[&str], input_word: Option<&str>) -> Result<Self, SynthError> {
        let w = Complex64::new(1.0 / (strings.len() as f64).sqrt(), 0.0);
        let terms: Vec<(&str, Complex64)> = strings.iter().map(|&s| (s, w)).collect();
        Self::new(&terms, input_word)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn terms(&self) -> &[(Register, Complex64)] {
        &self.terms
    }

    pub fn input_word(&self) -> &Register {
        &self.input_word
    }

    pub fn strings(&self) -> Vec<Register> {
        self.terms.iter().map(|(r, _)| r.clone()).collect()
    }

    pub fn target_state(&self) -> RegisterState {
        RegisterState::from_registers(self.k, self.terms.iter().cloned())
            .expect("validated at construction")
    }

    pub fn from_json(text: &str) -> Result<Self, SynthError> {
        let doc: SpecDoc =
            serde_json::from_str(text).map_err(|e| SynthError::Syntax(e.to_string()))?;
        if let Some(v) = doc.qsync_schema {
            if v != SCHEMA_VERSION {
                return Err(SynthError::Syntax(format!(
                    "unsupported schema version {v}"
                )));
            }
        }
        let terms: Vec<(&str, Complex64)> = doc
            .terms
            .iter()
            .map(|t| (t.string.as_str(), Complex64::new(t.re, t.im)))
            .collect();
        let spec = Self::new(&terms, doc.word.as_deref())?;
        if spec.k != doc.k {
            return Err(SynthError::LengthMismatch(doc.k, spec.k));
        }
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        let doc = SpecDoc {
            qsync_schema: Some(SCHEMA_VERSION),
            k: self.k,
            word: Some(self.input_word.to_string()),
            terms: self
                .terms
                .iter()
                .map(|(r, c)| TermDoc {
                    string: r.to_string(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("spec serialization")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    qsync_schema: Option<u32>,
    k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    word: Option<String>,
    terms: Vec<TermDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDoc {
    string: String,
    re: f64,
    #[serde(default)]
    im: f64,
}

/// Distinct suffixes `w[t+1..k]` for `t = 0..=k`, each level sorted.
fn levels(strings: &[Register]) -> Result<Vec<Vec<Register>>, SynthError> {
    let k = strings.first().ok_or(SynthError::NoTerms)?.len();
    let mut seen = BTreeSet::new();
    for r in strings {
        if r.len() != k {
            return Err(SynthError::LengthMismatch(k, r.len()));
        }
        if !seen.insert(r) {
            return Err(SynthError::DuplicateString(r.to_string()));
        }
    }
    Ok((0..=k)
        .map(|t| {
            strings
                .iter()
                .map(|r| r.suffix(t + 1))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect()
        })
        .collect())
}

/// Number of distinct remaining outputs at each level `0..=k`.
pub fn suffix_levels(strings: &[Register]) -> Result<Vec<usize>, SynthError> {
    Ok(levels(strings)?.iter().map(Vec::len).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthResult {
    pub dfa: Dfa,
    pub perm: JointPerm,
    pub branch_states: Vec<(Register, usize)>,
    pub final_state: usize,
    pub level_sizes: Vec<usize>,
}

impl SynthResult {
    pub fn n(&self) -> usize {
        self.dfa.n()
    }

    /// `sum_i c_i |branch_i>` for the given spec's coefficients.
    pub fn initial_superposition(&self, spec: &TargetSpec) -> Vec<(usize, Complex64)> {
        let branch: BTreeMap<&Register, usize> =
            self.branch_states.iter().map(|(r, q)| (r, *q)).collect();
        spec.terms
            .iter()
            .filter_map(|(r, c)| branch.get(r).map(|&q| (q, *c)))
            .collect()
    }

    /// `|input word> ⊗ sum_i c_i |branch_i>`.
    pub fn initial_state(&self, spec: &TargetSpec) -> Result<SparseState, SynthError> {
        let amps = self.initial_superposition(spec);
        Ok(SparseState::from_terms(
            spec.k,
            self.n(),
            0.0,
            amps.into_iter()
                .map(|(q, c)| (spec.input_word.clone(), q, c)),
        )?)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let branches: serde_json::Map<String, serde_json::Value> = self
            .branch_states
            .iter()
            .map(|(r, q)| (r.to_string(), json!(q)))
            .collect();
        json!({
            "qsync_schema": SCHEMA_VERSION,
            "states": self.n(),
            "level_sizes": self.level_sizes,
            "final_state": self.final_state,
            "branch_states": branches,
            "automaton": self.dfa.to_json_value(),
            "permutation": self.perm.to_json_value(),
        })
    }
}

/// Builds the suffix-merge automaton for `spec`.
pub fn synthesize(spec: &TargetSpec) -> Result<SynthResult, SynthError> {
    let strings = spec.strings();
    let levels = levels(&strings)?;
    let k = spec.k;
    let mut offset = Vec::with_capacity(k + 1);
    let mut n = 0;
    for level in &levels {
        offset.push(n);
        n += level.len();
    }
    let node = |t: usize, suffix: &Register| -> usize {
        offset[t]
            + levels[t]
                .binary_search(suffix)
                .expect("suffix present at its level")
    };

    let mut partial: BTreeMap<Pair, Pair> = BTreeMap::new();
    for t in 1..=k {
        let read = spec.input_word.get(t);
        for s in &levels[t - 1] {
            let from = Pair::new(read, node(t - 1, s));
            let to = Pair::new(s.get(1), node(t, &s.suffix(2)));
            partial.insert(from, to);
        }
    }
    let used_images: BTreeSet<Pair> = partial.values().copied().collect();
    let all_pairs = || {
        Letter::ALL
            .into_iter()
            .flat_map(move |l| (0..n).map(move |q| Pair::new(l, q)))
    };
    let free_domain: Vec<Pair> = all_pairs().filter(|p| !partial.contains_key(p)).collect();
    let free_images: Vec<Pair> = all_pairs().filter(|p| !used_images.contains(p)).collect();
    debug_assert_eq!(free_domain.len(), free_images.len());
    let entries: Vec<(Pair, Pair)> = partial
        .into_iter()
        .chain(free_domain.into_iter().zip(free_images))
        .collect();

    let perm = JointPerm::from_map(n, &entries).expect("trie map is injective");
    let dfa = perm.underlying_dfa().with_name("synthesized");
    let branch_states = strings.iter().map(|r| (r.clone(), node(0, r))).collect();
    Ok(SynthResult {
        dfa,
        perm,
        branch_states,
        final_state: offset[k],
        level_sizes: levels.iter().map(Vec::len).collect(),
    })
}

/// Runs the synthesized automaton and checks the output is exactly
/// `target ⊗ |final>`, along with the realization and balance properties.
pub fn verify_synthesis(r: &SynthResult, spec: &TargetSpec) -> bool {
    if !verify_realizes(&r.perm, &r.dfa) || !r.dfa.is_balanced() {
        return false;
    }
    let Ok(s0) = r.initial_state(spec) else {
        return false;
    };
    let Ok(out) = run_final(&r.perm, &s0) else {
        return false;
    };
    if out.support_size() != spec.terms.len() {
        return false;
    }
    let target = spec.target_state();
    let exact = out
        .terms()
        .all(|(reg, q, c)| q == r.final_state && (c - target.amplitude(reg)).norm() <= SYNTH_TOL);
    exact
}
