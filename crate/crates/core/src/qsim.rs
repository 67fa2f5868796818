//! Exact simulation of a qubit register coupled to an automaton qudit.
//!
//! Joint basis states are `|r>|q>` with `r` a string over `{a, b}` and `q` an
//! automaton state. Step `t` (1-based) applies the joint permutation to qubit
//! `t` and the qudit, which only relabels basis states. The support size and
//! every amplitude are preserved exactly, so states are stored sparsely.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use thiserror::Error;

use crate::linalg::{gram_from_columns, hermitian_eigenvalues};
use crate::unitarize::{JointPerm, Letter, Pair};
use crate::SCHEMA_VERSION;

/// Amplitudes at or below this magnitude are pruned.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsimError {
    #[error("automaton amplitudes are all zero")]
    ZeroVector,
    #[error("state {0} listed more than once")]
    DuplicateState(usize),
    #[error("register string {0:?} listed more than once")]
    DuplicateString(String),
    #[error("{0:?} is not a register letter (expected a or b)")]
    BadLetter(char),
    #[error("register must hold at least one qubit")]
    EmptyWord,
    #[error("automaton state {state} outside [0, {n})")]
    StateOutOfRange { state: usize, n: usize },
    #[error("step {t} outside 1..={k}")]
    StepOutOfRange { t: usize, k: usize },
    #[error("permutation acts on {perm} states but the state has dimension {state}")]
    DimensionMismatch { perm: usize, state: usize },
    #[error("register strings have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("norm {0} differs from 1")]
    NotNormalized(f64),
    #[error("ensemble probabilities invalid: {0}")]
    BadEnsemble(String),
    #[error("malformed state file: {0}")]
    Syntax(String),
}

// ---------------------------------------------------------------------------
// Register strings

/// Packed register string. Position 1 sits in the most significant bit of
/// the first word, so the derived ordering is lexicographic with `a < b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Register {
    len: usize,
    words: Vec<u64>,
}

impl Register {
    pub fn uniform(len: usize, letter: Letter) -> Self {
        let mut r = Register {
            len,
            words: vec![0; len.div_ceil(64)],
        };
        if letter == Letter::B {
            for t in 1..=len {
                r.set(t, Letter::B);
            }
        }
        r
    }

    pub fn parse(text: &str) -> Result<Self, QsimError> {
        let letters = text
            .chars()
            .map(|c| Letter::from_char(c).ok_or(QsimError::BadLetter(c)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_letters(&letters))
    }

    pub fn from_letters(letters: &[Letter]) -> Self {
        let mut r = Self::uniform(letters.len(), Letter::A);
        for (i, &l) in letters.iter().enumerate() {
            r.set(i + 1, l);
        }
        r
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    fn slot(t: usize) -> (usize, u64) {
        let i = t - 1;
        (i / 64, 1u64 << (63 - i % 64))
    }

    /// Letter at 1-based position `t`.
    #[inline]
    pub fn get(&self, t: usize) -> Letter {
        debug_assert!(t >= 1 && t <= self.len);
        let (w, mask) = Self::slot(t);
        if self.words[w] & mask == 0 {
            Letter::A
        } else {
            Letter::B
        }
    }

    #[inline]
    pub fn set(&mut self, t: usize, letter: Letter) {
        debug_assert!(t >= 1 && t <= self.len);
        let (w, mask) = Self::slot(t);
        match letter {
            Letter::A => self.words[w] &= !mask,
            Letter::B => self.words[w] |= mask,
        }
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (1..=self.len).map(|t| self.get(t))
    }

    /// The letters at `positions` (1-based), in the given order.
    pub fn project(&self, positions: &[usize]) -> Register {
        let mut r = Register::uniform(positions.len(), Letter::A);
        for (i, &t) in positions.iter().enumerate() {
            r.set(i + 1, self.get(t));
        }
        r
    }

    /// Positions `from..=len` as a new register (empty if `from > len`).
    pub fn suffix(&self, from: usize) -> Register {
        let positions: Vec<usize> = (from..=self.len).collect();
        self.project(&positions)
    }
}

impl fmt::Display for Register {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.letters() {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Joint states

/// Sparse joint state of a `k`-qubit register and an `n`-level automaton.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseState {
    k: usize,
    n: usize,
    tol: f64,
    amps: BTreeMap<(Register, usize), Complex64>,
}

impl SparseState {
    /// Builds a state from explicit terms, pruning amplitudes at or below `tol`.
    /// No normalization is applied.
    pub fn from_terms(
        k: usize,
        n: usize,
        tol: f64,
        terms: impl IntoIterator<Item = (Register, usize, Complex64)>,
    ) -> Result<Self, QsimError> {
        let mut amps = BTreeMap::new();
        for (r, q, c) in terms {
            if r.len() != k {
                return Err(QsimError::LengthMismatch(k, r.len()));
            }
            if q >= n {
                return Err(QsimError::StateOutOfRange { state: q, n });
            }
            if c.norm() <= tol {
                continue;
            }
            if amps.insert((r.clone(), q), c).is_some() {
                return Err(QsimError::DuplicateString(format!("{r}|{q}")));
            }
        }
        Ok(Self { k, n, tol, amps })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn support_size(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn amplitude(&self, register: &Register, state: usize) -> Complex64 {
        self.amps
            .get(&(register.clone(), state))
            .copied()
            .unwrap_or_default()
    }

    /// Terms sorted by `(register, state)`.
    pub fn terms(&self) -> impl Iterator<Item = (&Register, usize, Complex64)> {
        self.amps.iter().map(|((r, q), &c)| (r, *q, c))
    }

    /// Same terms embedded in an automaton of dimension `n >= self.n()`.
    pub fn with_dimension(mut self, n: usize) -> Result<Self, QsimError> {
        if let Some(((_, q), _)) = self.amps.iter().find(|((_, q), _)| *q >= n) {
            return Err(QsimError::StateOutOfRange { state: *q, n });
        }
        self.n = n;
        Ok(self)
    }

    /// True when every term is a single computational basis vector.
    pub fn is_basis(&self) -> bool {
        self.amps.len() == 1
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&StateDocOut::from(self)).expect("state serialization")
    }

    pub fn to_json_compact(&self) -> String {
        serde_json::to_string(&StateDocOut::from(self)).expect("state serialization")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::from_str(&self.to_json_compact()).expect("valid JSON")
    }

    /// Reads a state file. The automaton dimension is `n` if given, else one
    /// past the largest listed state.
    pub fn from_json(text: &str, n: Option<usize>) -> Result<Self, QsimError> {
        let doc: StateDocIn =
            serde_json::from_str(text).map_err(|e| QsimError::Syntax(e.to_string()))?;
        doc.into_state(n)
    }
}

/// Product of a classical word and an automaton superposition, renormalized.
pub fn init_joint(
    word: &str,
    automaton_amps: &[(usize, Complex64)],
    n: usize,
) -> Result<SparseState, QsimError> {
    init_joint_with_tol(word, automaton_amps, n, DEFAULT_TOL)
}

pub fn init_joint_with_tol(
    word: &str,
    automaton_amps: &[(usize, Complex64)],
    n: usize,
    tol: f64,
) -> Result<SparseState, QsimError> {
    let register = Register::parse(word)?;
    if register.is_empty() {
        return Err(QsimError::EmptyWord);
    }
    let mut seen = vec![false; n];
    for &(q, _) in automaton_amps {
        if q >= n {
            return Err(QsimError::StateOutOfRange { state: q, n });
        }
        if std::mem::replace(&mut seen[q], true) {
            return Err(QsimError::DuplicateState(q));
        }
    }
    let norm = automaton_amps
        .iter()
        .map(|(_, c)| c.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if norm <= tol {
        return Err(QsimError::ZeroVector);
    }
    SparseState::from_terms(
        register.len(),
        n,
        tol,
        automaton_amps
            .iter()
            .map(|&(q, c)| (register.clone(), q, c / norm)),
    )
}

/// Applies the joint permutation to qubit `t` (1-based) and the automaton.
pub fn step(perm: &JointPerm, s: &SparseState, t: usize) -> Result<SparseState, QsimError> {
    if perm.n() != s.n {
        return Err(QsimError::DimensionMismatch {
            perm: perm.n(),
            state: s.n,
        });
    }
    if t == 0 || t > s.k {
        return Err(QsimError::StepOutOfRange { t, k: s.k });
    }
    let mut amps = BTreeMap::new();
    for ((r, q), &c) in &s.amps {
        let image = perm.apply(Pair::new(r.get(t), *q));
        let mut r2 = r.clone();
        r2.set(t, image.letter);
        let clash = amps.insert((r2, image.state), c);
        debug_assert!(clash.is_none(), "permutation images collide");
    }
    Ok(SparseState {
        k: s.k,
        n: s.n,
        tol: s.tol,
        amps,
    })
}

/// Trajectory `[s0, U_1 s0, U_2 U_1 s0, ..., U_k ... U_1 s0]`.
pub fn run(perm: &JointPerm, s0: &SparseState) -> Result<Vec<SparseState>, QsimError> {
    let mut traj = Vec::with_capacity(s0.k + 1);
    traj.push(s0.clone());
    for t in 1..=s0.k {
        let next = step(perm, traj.last().unwrap(), t)?;
        traj.push(next);
    }
    Ok(traj)
}

/// Final state of [`run`] without keeping the trajectory.
pub fn run_final(perm: &JointPerm, s0: &SparseState) -> Result<SparseState, QsimError> {
    let mut s = s0.clone();
    for t in 1..=s0.k {
        s = step(perm, &s, t)?;
    }
    Ok(s)
}

// ---------------------------------------------------------------------------
// Register-only states

/// Pure state of a register alone.
#[derive(Debug, Clone, PartialEq)]
pub struct RegisterState {
    k: usize,
    amps: BTreeMap<Register, Complex64>,
}

impl RegisterState {
    pub fn from_registers(
        k: usize,
        terms: impl IntoIterator<Item = (Register, Complex64)>,
    ) -> Result<Self, QsimError> {
        let mut amps = BTreeMap::new();
        for (r, c) in terms {
            if r.len() != k {
                return Err(QsimError::LengthMismatch(k, r.len()));
            }
            if amps.insert(r.clone(), c).is_some() {
                return Err(QsimError::DuplicateString(r.to_string()));
            }
        }
        Ok(Self { k, amps })
    }

    /// Builds a state from `(string, amplitude)` terms as given (no normalization).
    pub fn from_terms(terms: &[(&str, Complex64)]) -> Result<Self, QsimError> {
        let k = terms.first().map_or(0, |(s, _)| s.chars().count());
        let regs = terms
            .iter()
            .map(|&(s, c)| Ok((Register::parse(s)?, c)))
            .collect::<Result<Vec<_>, QsimError>>()?;
        Self::from_registers(k, regs)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalized(mut self) -> Result<Self, QsimError> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(QsimError::ZeroVector);
        }
        self.amps.values_mut().for_each(|c| *c /= norm);
        Ok(self)
    }

    pub fn amplitude(&self, r: &Register) -> Complex64 {
        self.amps.get(r).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Register, Complex64)> {
        self.amps.iter().map(|(r, &c)| (r, c))
    }

    pub fn support_size(&self) -> usize {
        self.amps.len()
    }

    /// Tensor product `self ⊗ |state>` as a joint state of dimension `n`.
    pub fn with_automaton(&self, state: usize, n: usize) -> Result<SparseState, QsimError> {
        SparseState::from_terms(
            self.k,
            n,
            0.0,
            self.amps.iter().map(|(r, &c)| (r.clone(), state, c)),
        )
    }
}

impl fmt::Display for RegisterState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (r, c)) in self.amps.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i)|{r}>", c.re, c.im)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Behavior classification

#[derive(Debug, Clone, PartialEq)]
pub enum Behavior {
    /// A single joint basis vector.
    Basis { register: Register, state: usize },
    /// A product `|phi>_R ⊗ |psi>_Q` that is not a single basis vector.
    Decoupled {
        register: RegisterState,
        automaton: Vec<(usize, Complex64)>,
    },
    /// Schmidt rank above one across the register|automaton cut.
    Entangled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorClass {
    pub behavior: Behavior,
    pub schmidt_rank: usize,
}

impl BehaviorClass {
    pub fn is_entangled(&self) -> bool {
        matches!(self.behavior, Behavior::Entangled)
    }

    /// The automaton basis state, when the automaton factor is one.
    pub fn automaton_basis_state(&self) -> Option<usize> {
        match &self.behavior {
            Behavior::Basis { state, .. } => Some(*state),
            Behavior::Decoupled { automaton, .. } if automaton.len() == 1 => Some(automaton[0].0),
            _ => None,
        }
    }

    /// Register factor of a product state.
    pub fn register_factor(&self) -> Option<RegisterState> {
        match &self.behavior {
            Behavior::Basis { register, .. } => RegisterState::from_registers(
                register.len(),
                [(register.clone(), Complex64::new(1.0, 0.0))],
            )
            .ok(),
            Behavior::Decoupled { register, .. } => Some(register.clone()),
            Behavior::Entangled => None,
        }
    }
}

/// Schmidt rank across the register|automaton cut, from the Gram matrix of
/// the per-state register vectors, and the resulting behavior class.
pub fn classify_behavior(s: &SparseState) -> BehaviorClass {
    let mut states: Vec<usize> = s.amps.keys().map(|(_, q)| *q).collect();
    states.sort_unstable();
    states.dedup();
    let index: BTreeMap<usize, usize> = states.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    let mut by_register: BTreeMap<&Register, Vec<(usize, Complex64)>> = BTreeMap::new();
    for ((r, q), &c) in &s.amps {
        by_register.entry(r).or_default().push((index[q], c));
    }
    let gram = gram_from_columns(states.len(), by_register.values().map(Vec::as_slice));
    let rank = hermitian_eigenvalues(gram)
        .into_iter()
        .filter(|&l| l > s.tol)
        .count();

    if rank != 1 {
        return BehaviorClass {
            behavior: Behavior::Entangled,
            schmidt_rank: rank,
        };
    }
    if s.amps.len() == 1 {
        let ((r, q), _) = s.amps.iter().next().unwrap();
        return BehaviorClass {
            behavior: Behavior::Basis {
                register: r.clone(),
                state: *q,
            },
            schmidt_rank: 1,
        };
    }
    // Register factor from the heaviest automaton component.
    let mut weight: BTreeMap<usize, f64> = BTreeMap::new();
    for ((_, q), c) in &s.amps {
        *weight.entry(*q).or_default() += c.norm_sqr();
    }
    let (&q_star, &w_star) = weight.iter().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let norm = w_star.sqrt();
    let register = RegisterState::from_registers(
        s.k,
        s.amps
            .iter()
            .filter(|((_, q), _)| *q == q_star)
            .map(|((r, _), &c)| (r.clone(), c / norm)),
    )
    .expect("distinct strings");
    let automaton: Vec<(usize, Complex64)> = states
        .iter()
        .map(|&q| {
            let overlap: Complex64 = s
                .amps
                .iter()
                .filter(|((_, p), _)| *p == q)
                .map(|((r, _), &c)| register.amplitude(r).conj() * c)
                .sum();
            (q, overlap)
        })
        .filter(|(_, c)| c.norm() > s.tol)
        .collect();
    BehaviorClass {
        behavior: Behavior::Decoupled {
            register,
            automaton,
        },
        schmidt_rank: 1,
    }
}

// ---------------------------------------------------------------------------
// Mixed automaton inputs

/// Probability-weighted pure states of the automaton alone.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedEnsemble {
    n: usize,
    members: Vec<(f64, Vec<Complex64>)>,
}

impl MixedEnsemble {
    pub fn new(members: Vec<(f64, Vec<Complex64>)>) -> Result<Self, QsimError> {
        let n = members.first().map_or(0, |(_, v)| v.len());
        if members.is_empty() || n == 0 {
            return Err(QsimError::BadEnsemble("no members".into()));
        }
        let mut total = 0.0;
        for (p, v) in &members {
            if v.len() != n {
                return Err(QsimError::BadEnsemble(
                    "members have different dimensions".into(),
                ));
            }
            if *p < 0.0 {
                return Err(QsimError::BadEnsemble(format!("negative probability {p}")));
            }
            let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum();
            if (norm - 1.0).abs() > DEFAULT_TOL {
                return Err(QsimError::NotNormalized(norm.sqrt()));
            }
            total += p;
        }
        if (total - 1.0).abs() > DEFAULT_TOL {
            return Err(QsimError::BadEnsemble(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { n, members })
    }

    /// A single pure state.
    pub fn pure(v: Vec<Complex64>) -> Result<Self, QsimError> {
        Self::new(vec![(1.0, v)])
    }

    /// Uniform mixture of the basis states `0..n`.
    pub fn maximally_mixed(n: usize) -> Self {
        let members = (0..n)
            .map(|q| {
                let mut v = vec![Complex64::default(); n];
                v[q] = Complex64::new(1.0, 0.0);
                (1.0 / n as f64, v)
            })
            .collect();
        Self { n, members }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[(f64, Vec<Complex64>)] {
        &self.members
    }
}

/// Joint states evolved branch by branch from a [`MixedEnsemble`].
#[derive(Debug, Clone, PartialEq)]
pub struct JointEnsemble {
    pub members: Vec<(f64, SparseState)>,
}

impl JointEnsemble {
    pub fn k(&self) -> usize {
        self.members.first().map_or(0, |(_, s)| s.k())
    }
}

/// Evolves every ensemble member with the same word; probabilities are kept.
pub fn run_mixed(
    perm: &JointPerm,
    word: &str,
    e: &MixedEnsemble,
) -> Result<JointEnsemble, QsimError> {
    if e.n != perm.n() {
        return Err(QsimError::DimensionMismatch {
            perm: perm.n(),
            state: e.n,
        });
    }
    let members = e
        .members
        .iter()
        .filter(|(p, _)| *p > 0.0)
        .map(|(p, v)| {
            let amps: Vec<(usize, Complex64)> = v.iter().copied().enumerate().collect();
            let s0 = init_joint_with_tol(word, &amps, e.n, DEFAULT_TOL)?;
            Ok((*p, run_final(perm, &s0)?))
        })
        .collect::<Result<Vec<_>, QsimError>>()?;
    Ok(JointEnsemble { members })
}

// ---------------------------------------------------------------------------
// File formats

fn float17(x: f64) -> Box<RawValue> {
    RawValue::from_string(format!("{x:.16e}")).expect("valid JSON number")
}

#[derive(Serialize)]
struct AmpOut {
    register: String,
    state: usize,
    re: Box<RawValue>,
    im: Box<RawValue>,
}

#[derive(Serialize)]
struct StateDocOut {
    qsync_schema: u32,
    k: usize,
    amplitudes: Vec<AmpOut>,
}

impl From<&SparseState> for StateDocOut {
    fn from(s: &SparseState) -> Self {
        StateDocOut {
            qsync_schema: SCHEMA_VERSION,
            k: s.k,
            amplitudes: s
                .terms()
                .map(|(r, q, c)| AmpOut {
                    register: r.to_string(),
                    state: q,
                    re: float17(c.re),
                    im: float17(c.im),
                })
                .collect(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AmpIn {
    register: String,
    state: usize,
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDocIn {
    #[serde(default)]
    qsync_schema: Option<u32>,
    k: usize,
    amplitudes: Vec<AmpIn>,
}

impl StateDocIn {
    fn into_state(self, n: Option<usize>) -> Result<SparseState, QsimError> {
        if let Some(v) = self.qsync_schema {
            if v != SCHEMA_VERSION {
                return Err(QsimError::Syntax(format!("unsupported schema version {v}")));
            }
        }
        let n = n.unwrap_or_else(|| {
            self.amplitudes
                .iter()
                .map(|a| a.state + 1)
                .max()
                .unwrap_or(1)
        });
        let terms = self
            .amplitudes
            .iter()
            .map(|a| {
                Ok((
                    Register::parse(&a.register)?,
                    a.state,
                    Complex64::new(a.re, a.im),
                ))
            })
            .collect::<Result<Vec<_>, QsimError>>()?;
        SparseState::from_terms(self.k, n, DEFAULT_TOL, terms)
    }
}

/// Product-state initialization file: `{"word": str, "automaton": [{"state", "re", "im"}]}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSpec {
    #[serde(default)]
    pub qsync_schema: Option<u32>,
    pub word: String,
    pub automaton: Vec<AutomatonAmp>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomatonAmp {
    pub state: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Reads either an [`InitSpec`] document or a state file.
pub fn initial_state_from_json(text: &str, n: usize, tol: f64) -> Result<SparseState, QsimError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| QsimError::Syntax(e.to_string()))?;
    if value.get("word").is_some() {
        let spec: InitSpec =
            serde_json::from_value(value).map_err(|e| QsimError::Syntax(e.to_string()))?;
        let amps: Vec<(usize, Complex64)> = spec
            .automaton
            .iter()
            .map(|a| (a.state, Complex64::new(a.re, a.im)))
            .collect();
        init_joint_with_tol(&spec.word, &amps, n, tol)
    } else {
        let s = SparseState::from_json(text, Some(n))?;
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > tol.max(1e-9) {
            return Err(QsimError::NotNormalized(norm.sqrt()));
        }
        Ok(s)
    }
}
