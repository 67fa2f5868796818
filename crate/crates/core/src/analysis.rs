//! Reduced spectra, entropies, fidelity, spectator factoring and AME checks.
//!
//! Reduced density operators are never formed on the full register. For a cut
//! `C` with complement `C'`, the amplitudes are regrouped into a matrix
//! `M[c, c']` and the nonzero spectrum of `rho_C = M M†` is read off the
//! Gram matrix over whichever of `C`, `C'` has fewer distinct basis strings.
//! Ensembles are purified with a branch index carrying `sqrt(p)`.
//! Entropies are in bits.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::automaton::Word;
use crate::linalg::{gram_from_columns, hermitian_eigenvalues};
use crate::qsim::{
    run_mixed, JointEnsemble, MixedEnsemble, QsimError, Register, RegisterState, SparseState,
};
use crate::syncword::is_synchronizing_word;
use crate::unitarize::{JointPerm, Letter};

/// Eigenvalues above `-CLIP` are clipped to zero; anything lower is an error.
pub const CLIP: f64 = 1e-12;

/// Tolerance for purity, normalization and AME comparisons.
pub const CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("cut is empty")]
    EmptyCut,
    #[error("cut covers every subsystem")]
    FullCut,
    #[error("position {position} outside 1..={k}")]
    PositionOutOfRange { position: usize, k: usize },
    #[error("state has no automaton subsystem")]
    NoAutomaton,
    #[error("bad cut token {0:?} (expected a position or Q)")]
    BadCut(String),
    #[error("negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),
    #[error("state norm {0} differs from 1")]
    NotNormalized(f64),
    #[error("register lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("S_R = {s_r} but S_Q = {s_q}")]
    PurityMismatch { s_r: f64, s_q: f64 },
    #[error("word {0:?} does not synchronize the automaton")]
    NotSynchronizing(String),
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

// ---------------------------------------------------------------------------
// Cuts

/// A set of register positions (1-based) and optionally the automaton.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Cut {
    pub positions: BTreeSet<usize>,
    pub automaton: bool,
}

impl Cut {
    pub fn register(positions: impl IntoIterator<Item = usize>) -> Self {
        Self {
            positions: positions.into_iter().collect(),
            automaton: false,
        }
    }

    pub fn automaton() -> Self {
        Self {
            positions: BTreeSet::new(),
            automaton: true,
        }
    }

    /// Every register position `1..=k`.
    pub fn whole_register(k: usize) -> Self {
        Self::register(1..=k)
    }

    /// Parses a comma-separated list such as `1,3,Q`.
    pub fn parse(text: &str) -> Result<Self, AnalysisError> {
        let mut cut = Cut::default();
        for token in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            if token.eq_ignore_ascii_case("q") {
                cut.automaton = true;
            } else {
                match token.parse::<usize>() {
                    Ok(p) if p >= 1 => {
                        cut.positions.insert(p);
                    }
                    _ => return Err(AnalysisError::BadCut(token.to_string())),
                }
            }
        }
        Ok(cut)
    }

    fn validate(&self, k: usize, has_automaton: bool) -> Result<(), AnalysisError> {
        if let Some(&p) = self.positions.iter().find(|&&p| p == 0 || p > k) {
            return Err(AnalysisError::PositionOutOfRange { position: p, k });
        }
        if self.automaton && !has_automaton {
            return Err(AnalysisError::NoAutomaton);
        }
        if self.positions.is_empty() && !self.automaton {
            return Err(AnalysisError::EmptyCut);
        }
        if self.positions.len() == k && self.automaton == has_automaton {
            return Err(AnalysisError::FullCut);
        }
        Ok(())
    }
}

impl FromStr for Cut {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Cut::parse(s)
    }
}

impl fmt::Display for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.positions.iter().map(usize::to_string).collect();
        if self.automaton {
            parts.push("Q".into());
        }
        f.write_str(&parts.join(","))
    }
}

// ---------------------------------------------------------------------------
// Purified terms

/// Receives `(branch, register, automaton state, amplitude)`.
pub type TermVisitor<'a> = dyn FnMut(usize, &Register, Option<usize>, Complex64) + 'a;

/// Anything that can be written as purified terms.
pub trait Reducible {
    fn register_len(&self) -> usize;
    fn has_automaton(&self) -> bool;
    fn for_each_term(&self, f: &mut TermVisitor<'_>);
}

impl Reducible for SparseState {
    fn register_len(&self) -> usize {
        self.k()
    }

    fn has_automaton(&self) -> bool {
        true
    }

    fn for_each_term(&self, f: &mut TermVisitor<'_>) {
        for (r, q, c) in self.terms() {
            f(0, r, Some(q), c);
        }
    }
}

impl Reducible for JointEnsemble {
    fn register_len(&self) -> usize {
        self.k()
    }

    fn has_automaton(&self) -> bool {
        true
    }

    fn for_each_term(&self, f: &mut TermVisitor<'_>) {
        for (branch, (p, s)) in self.members.iter().enumerate() {
            let w = p.sqrt();
            for (r, q, c) in s.terms() {
                f(branch, r, Some(q), c * w);
            }
        }
    }
}

impl Reducible for RegisterState {
    fn register_len(&self) -> usize {
        self.k()
    }

    fn has_automaton(&self) -> bool {
        false
    }

    fn for_each_term(&self, f: &mut TermVisitor<'_>) {
        for (r, c) in self.terms() {
            f(0, r, None, c);
        }
    }
}

// ---------------------------------------------------------------------------
// Spectra

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub entropy_bits: f64,
    pub rank: usize,
}

impl SpectrumReport {
    fn from_eigenvalues(raw: Vec<f64>, tol: f64) -> Result<Self, AnalysisError> {
        let mut eigenvalues = Vec::with_capacity(raw.len());
        for l in raw {
            if l < -CLIP {
                return Err(AnalysisError::NegativeEigenvalue(l));
            }
            eigenvalues.push(l.max(0.0));
        }
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        let rank = eigenvalues.iter().filter(|&&l| l > tol).count();
        Ok(Self {
            entropy_bits: entropy_bits(&eigenvalues),
            eigenvalues,
            rank,
        })
    }
}

/// `-sum l log2 l` with `0 log 0 = 0`.
pub fn entropy_bits(eigenvalues: &[f64]) -> f64 {
    let s: f64 = eigenvalues
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.log2())
        .sum();
    s.max(0.0)
}

type Key = (Register, Option<usize>);

/// Spectrum of the reduced density operator on `cut`.
pub fn reduced_spectrum<R: Reducible + ?Sized>(
    x: &R,
    cut: &Cut,
) -> Result<SpectrumReport, AnalysisError> {
    let k = x.register_len();
    cut.validate(k, x.has_automaton())?;
    let inside: Vec<usize> = cut.positions.iter().copied().collect();
    let outside: Vec<usize> = (1..=k).filter(|p| !cut.positions.contains(p)).collect();

    let mut in_keys: BTreeMap<Key, usize> = BTreeMap::new();
    let mut out_keys: BTreeMap<(usize, Key), usize> = BTreeMap::new();
    let mut entries: Vec<(usize, usize, Complex64)> = Vec::new();
    x.for_each_term(&mut |branch, r, q, c| {
        let (q_in, q_out) = if cut.automaton { (q, None) } else { (None, q) };
        let key_in = (r.project(&inside), q_in);
        let key_out = (branch, (r.project(&outside), q_out));
        let next = in_keys.len();
        let i = *in_keys.entry(key_in).or_insert(next);
        let next = out_keys.len();
        let j = *out_keys.entry(key_out).or_insert(next);
        entries.push((i, j, c));
    });

    let (dim, n_cols, transpose) = if in_keys.len() <= out_keys.len() {
        (in_keys.len(), out_keys.len(), false)
    } else {
        (out_keys.len(), in_keys.len(), true)
    };
    let mut columns: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); n_cols];
    for (i, j, c) in entries {
        if transpose {
            columns[i].push((j, c));
        } else {
            columns[j].push((i, c));
        }
    }
    let gram = gram_from_columns(dim, columns.iter().map(Vec::as_slice));
    SpectrumReport::from_eigenvalues(hermitian_eigenvalues(gram), CHECK_TOL)
}

/// Spectrum of `rho_Q = sum_i p_i |v_i><v_i|`.
pub fn ensemble_spectrum(e: &MixedEnsemble) -> Result<SpectrumReport, AnalysisError> {
    let n = e.n();
    let mut rho = DMatrix::<Complex64>::zeros(n, n);
    for (p, v) in e.members() {
        for i in 0..n {
            for j in 0..n {
                rho[(i, j)] += v[i] * v[j].conj() * *p;
            }
        }
    }
    SpectrumReport::from_eigenvalues(hermitian_eigenvalues(rho), CHECK_TOL)
}

fn check_normalized(norm_sqr: f64) -> Result<(), AnalysisError> {
    if (norm_sqr - 1.0).abs() > CHECK_TOL {
        return Err(AnalysisError::NotNormalized(norm_sqr.sqrt()));
    }
    Ok(())
}

/// `I(Q:R) = S_Q + S_R - S_QR = 2 S_R` for a pure joint state.
pub fn mutual_information_qr(s: &SparseState) -> Result<f64, AnalysisError> {
    check_normalized(s.norm_sqr())?;
    let s_r = reduced_spectrum(s, &Cut::whole_register(s.k()))?.entropy_bits;
    let s_q = reduced_spectrum(s, &Cut::automaton())?.entropy_bits;
    if (s_r - s_q).abs() > CHECK_TOL {
        return Err(AnalysisError::PurityMismatch { s_r, s_q });
    }
    Ok(s_q + s_r)
}

/// `|<target|s>|^2`.
pub fn fidelity(s: &RegisterState, target: &RegisterState) -> Result<f64, AnalysisError> {
    if s.k() != target.k() {
        return Err(AnalysisError::LengthMismatch(s.k(), target.k()));
    }
    check_normalized(s.norm_sqr())?;
    check_normalized(target.norm_sqr())?;
    let overlap: Complex64 = target.terms().map(|(r, c)| c.conj() * s.amplitude(r)).sum();
    Ok(overlap.norm_sqr())
}

// ---------------------------------------------------------------------------
// AME

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmeReport {
    pub qubits: usize,
    pub subset_size: usize,
    pub subsets_checked: usize,
    pub is_ame: bool,
    pub worst_deviation: f64,
    pub worst_subset: Vec<usize>,
}

fn subsets(m: usize, h: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, h: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == h {
            out.push(cur.clone());
            return;
        }
        for p in start..=m {
            cur.push(p);
            rec(p + 1, m, h, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, m, h, &mut Vec::new(), &mut out);
    out
}

/// Checks that every `floor(m/2)`-qubit marginal is maximally mixed.
pub fn ame_check(s: &RegisterState) -> Result<AmeReport, AnalysisError> {
    check_normalized(s.norm_sqr())?;
    let m = s.k();
    let h = m / 2;
    if h == 0 {
        return Ok(AmeReport {
            qubits: m,
            subset_size: 0,
            subsets_checked: 0,
            is_ame: true,
            worst_deviation: 0.0,
            worst_subset: Vec::new(),
        });
    }
    let uniform = 1.0 / (1u64 << h) as f64;
    let all = subsets(m, h);
    let results = all
        .par_iter()
        .map(|subset| {
            let mut eig = reduced_spectrum(s, &Cut::register(subset.iter().copied()))?.eigenvalues;
            eig.resize(1 << h, 0.0);
            let dev = eig.iter().map(|l| (l - uniform).abs()).fold(0.0, f64::max);
            Ok((dev, subset.clone()))
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    let (worst_deviation, worst_subset) = results.into_iter().fold(
        (0.0, Vec::new()),
        |best, cur| if cur.0 > best.0 { cur } else { best },
    );
    Ok(AmeReport {
        qubits: m,
        subset_size: h,
        subsets_checked: all.len(),
        is_ame: worst_deviation < CHECK_TOL,
        worst_deviation,
        worst_subset,
    })
}

// ---------------------------------------------------------------------------
// Spectators

/// A register state split into fixed-letter spectator qubits and a core.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectatorFactoring {
    pub spectators: Vec<(usize, Letter)>,
    pub core_positions: Vec<usize>,
    pub core: RegisterState,
}

impl SpectatorFactoring {
    /// `spectators ⊗ core` on the original positions.
    pub fn reconstruct(&self) -> RegisterState {
        let k = self.spectators.len() + self.core_positions.len();
        let terms = self.core.terms().map(|(r, c)| {
            let mut letters = vec![Letter::A; k];
            for &(p, l) in &self.spectators {
                letters[p - 1] = l;
            }
            for (i, &p) in self.core_positions.iter().enumerate() {
                letters[p - 1] = r.get(i + 1);
            }
            (Register::from_letters(&letters), c)
        });
        RegisterState::from_registers(k, terms).expect("positions partition the register")
    }
}

/// Factors out every position whose single-qubit reduction is a pure
/// computational basis state.
pub fn factor_spectators(s: &RegisterState) -> Result<SpectatorFactoring, AnalysisError> {
    check_normalized(s.norm_sqr())?;
    let k = s.k();
    let mut spectators = Vec::new();
    let mut core_positions = Vec::new();
    for t in 1..=k {
        let mut letters = s
            .terms()
            .filter(|(_, c)| c.norm() > CHECK_TOL)
            .map(|(r, _)| r.get(t));
        let first = letters.next();
        match first {
            Some(l) if letters.all(|x| x == l) => spectators.push((t, l)),
            _ => core_positions.push(t),
        }
    }
    let core = RegisterState::from_registers(
        core_positions.len(),
        s.terms()
            .filter(|(_, c)| c.norm() > CHECK_TOL)
            .map(|(r, c)| (r.project(&core_positions), c)),
    )?
    .normalized()?;
    Ok(SpectatorFactoring {
        spectators,
        core_positions,
        core,
    })
}

// ---------------------------------------------------------------------------
// Entropy pump

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyPump {
    pub s_in: f64,
    pub s_out_register: f64,
    pub delta: f64,
    pub final_state: usize,
}

/// Runs a mixed automaton input through a synchronizing word and compares
/// the automaton's initial entropy with the register's final entropy.
pub fn entropy_pump_check(
    perm: &JointPerm,
    word: &str,
    e: &MixedEnsemble,
) -> Result<EntropyPump, AnalysisError> {
    let dfa = perm.underlying_dfa();
    let lower = word.to_ascii_lowercase();
    let classical = Word::parse(&lower, dfa.alphabet())
        .map_err(|_| AnalysisError::NotSynchronizing(word.into()))?;
    let final_state = is_synchronizing_word(&dfa, &classical)
        .ok_or_else(|| AnalysisError::NotSynchronizing(word.into()))?;
    let s_in = ensemble_spectrum(e)?.entropy_bits;
    let joint = run_mixed(perm, &lower, e)?;
    let s_out_register =
        reduced_spectrum(&joint, &Cut::whole_register(classical.len()))?.entropy_bits;
    Ok(EntropyPump {
        s_in,
        s_out_register,
        delta: (s_in - s_out_register).abs(),
        final_state,
    })
}
