//! Unitary realizations of balanced automata.
//!
//! A realization is a bijection on `(letter, state)` pairs whose state component
//! reproduces the transition function: `(l, q) -> (l', delta(q, l))`. In the
//! computational basis this is the permutation unitary acting on one register
//! qubit and the automaton qudit.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automaton::{ghz4, Dfa};
use crate::SCHEMA_VERSION;

/// Largest automaton accepted by [`exists_permutation_bruteforce`].
pub const BRUTEFORCE_GUARD: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UnitarizeError {
    #[error(
        "automaton is not balanced; in-degree differs from |alphabet| at states {violations:?}"
    )]
    NotBalanced { violations: Vec<usize> },
    #[error("the transition multigraph is disconnected; no Eulerian circuit exists")]
    Disconnected,
    #[error("unitary construction needs the two-letter alphabet {{a, b}}, got {0:?}")]
    WrongAlphabet(Vec<String>),
    #[error("brute-force search limited to {guard} states, automaton has {n}")]
    GuardExceeded { n: usize, guard: usize },
    #[error("map is not a bijection on (letter, state) pairs: {0}")]
    NotBijective(String),
    #[error("malformed permutation file: {0}")]
    Syntax(String),
}

/// One qubit value of the register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    A = 0,
    B = 1,
}

impl Letter {
    pub const ALL: [Letter; 2] = [Letter::A, Letter::B];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Letter {
        match i {
            0 => Letter::A,
            1 => Letter::B,
            _ => panic!("letter index {i} outside the binary alphabet"),
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'a' | 'A' => Some(Letter::A),
            'b' | 'B' => Some(Letter::B),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::B => 'b',
        }
    }

    pub fn flip(self) -> Letter {
        match self {
            Letter::A => Letter::B,
            Letter::B => Letter::A,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// A basis vector `|letter>|state>` of one register qubit and the automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pair {
    pub letter: Letter,
    pub state: usize,
}

impl Pair {
    pub const fn new(letter: Letter, state: usize) -> Self {
        Self { letter, state }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.letter, self.state)
    }
}

/// Bijection on the `2n` pairs, stored as `images[letter * n + state]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JointPerm {
    n: usize,
    images: Vec<Pair>,
}

impl JointPerm {
    /// Builds a permutation from the images of `(a,0..n)` followed by `(b,0..n)`.
    pub fn from_images(n: usize, images: Vec<Pair>) -> Result<Self, UnitarizeError> {
        if images.len() != 2 * n {
            return Err(UnitarizeError::NotBijective(format!(
                "expected {} images, got {}",
                2 * n,
                images.len()
            )));
        }
        let mut hit = vec![false; 2 * n];
        for (i, p) in images.iter().enumerate() {
            if p.state >= n {
                return Err(UnitarizeError::NotBijective(format!(
                    "image state {} out of range",
                    p.state
                )));
            }
            let slot = p.letter.index() * n + p.state;
            if std::mem::replace(&mut hit[slot], true) {
                let from = Pair::new(Letter::from_index(i / n), i % n);
                return Err(UnitarizeError::NotBijective(format!(
                    "{p} is the image of {from} and another pair"
                )));
            }
        }
        Ok(Self { n, images })
    }

    /// Builds a permutation from explicit `(from, to)` entries covering every pair once.
    pub fn from_map(n: usize, entries: &[(Pair, Pair)]) -> Result<Self, UnitarizeError> {
        let mut images: Vec<Option<Pair>> = vec![None; 2 * n];
        for &(from, to) in entries {
            if from.state >= n {
                return Err(UnitarizeError::NotBijective(format!(
                    "source {from} out of range"
                )));
            }
            let slot = &mut images[from.letter.index() * n + from.state];
            if slot.replace(to).is_some() {
                return Err(UnitarizeError::NotBijective(format!(
                    "source {from} listed twice"
                )));
            }
        }
        let images = images
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                p.ok_or_else(|| {
                    UnitarizeError::NotBijective(format!(
                        "no image for {}",
                        Pair::new(Letter::from_index(i / n), i % n)
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_images(n, images)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn apply(&self, p: Pair) -> Pair {
        self.images[p.letter.index() * self.n + p.state]
    }

    pub fn inverse(&self) -> JointPerm {
        let mut images = vec![Pair::new(Letter::A, 0); 2 * self.n];
        for (i, p) in self.images.iter().enumerate() {
            images[p.letter.index() * self.n + p.state] =
                Pair::new(Letter::from_index(i / self.n), i % self.n);
        }
        JointPerm { n: self.n, images }
    }

    /// All `(from, to)` entries sorted by source.
    pub fn entries(&self) -> impl Iterator<Item = (Pair, Pair)> + '_ {
        self.images
            .iter()
            .enumerate()
            .map(move |(i, &to)| (Pair::new(Letter::from_index(i / self.n), i % self.n), to))
    }

    /// The automaton whose transitions are the state components of the images.
    pub fn underlying_dfa(&self) -> Dfa {
        let row = |l: Letter| {
            (0..self.n)
                .map(|q| self.apply(Pair::new(l, q)).state)
                .collect()
        };
        Dfa::binary(row(Letter::A), row(Letter::B)).expect("images are in range")
    }

    /// Cycle decomposition; each cycle starts at its smallest pair and cycles
    /// are ordered by that pair.
    pub fn cycles(&self) -> Vec<Vec<Pair>> {
        let mut seen = vec![false; 2 * self.n];
        let mut out = Vec::new();
        for (start, _) in self.entries() {
            let slot = start.letter.index() * self.n + start.state;
            if seen[slot] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut cur = start;
            loop {
                seen[cur.letter.index() * self.n + cur.state] = true;
                cycle.push(cur);
                cur = self.apply(cur);
                if cur == start {
                    break;
                }
            }
            out.push(cycle);
        }
        out
    }

    /// Swaps the images of two source pairs. The result is still a bijection.
    pub fn swap_images(&mut self, x: Pair, y: Pair) {
        let (i, j) = (
            x.letter.index() * self.n + x.state,
            y.letter.index() * self.n + y.state,
        );
        self.images.swap(i, j);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&PermDoc::from(self)).expect("permutation serialization")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(PermDoc::from(self)).expect("permutation serialization")
    }

    pub fn from_json(text: &str) -> Result<Self, UnitarizeError> {
        let doc: PermDoc =
            serde_json::from_str(text).map_err(|e| UnitarizeError::Syntax(e.to_string()))?;
        doc.try_into()
    }
}

impl fmt::Display for JointPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, cycle) in self.cycles().into_iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "(")?;
            for (j, p) in cycle.iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{p}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnitarizeMode {
    /// Per target state, incoming arcs in (letter, source) order receive
    /// output letters in alphabet order.
    #[default]
    Canonical,
    /// Successive arcs of an Eulerian circuit of the union multigraph.
    Eulerian,
}

impl std::str::FromStr for UnitarizeMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "canonical" => Ok(Self::Canonical),
            "eulerian" => Ok(Self::Eulerian),
            other => Err(format!(
                "unknown mode {other:?} (expected canonical|eulerian)"
            )),
        }
    }
}

/// Constructs a permutation realizing `dfa`, which must be balanced.
pub fn unitarize(dfa: &Dfa, mode: UnitarizeMode) -> Result<JointPerm, UnitarizeError> {
    if dfa.alphabet_size() != 2 {
        return Err(UnitarizeError::WrongAlphabet(dfa.alphabet().to_vec()));
    }
    let profile = dfa.degree_profile();
    if !profile.is_balanced() {
        return Err(UnitarizeError::NotBalanced {
            violations: profile.violations(),
        });
    }
    match mode {
        UnitarizeMode::Canonical => Ok(canonical(dfa)),
        UnitarizeMode::Eulerian => eulerian(dfa),
    }
}

fn canonical(dfa: &Dfa) -> JointPerm {
    let n = dfa.n();
    let mut filled = vec![0usize; n];
    let mut images = vec![Pair::new(Letter::A, 0); 2 * n];
    for letter in Letter::ALL {
        for source in 0..n {
            let target = dfa.next(source, letter.index());
            images[letter.index() * n + source] =
                Pair::new(Letter::from_index(filled[target]), target);
            filled[target] += 1;
        }
    }
    JointPerm::from_images(n, images).expect("balanced automaton gives a bijection")
}

fn weakly_connected(dfa: &Dfa) -> bool {
    let n = dfa.n();
    let mut adj = vec![Vec::new(); n];
    for l in 0..dfa.alphabet_size() {
        for q in 0..n {
            let t = dfa.next(q, l);
            adj[q].push(t);
            adj[t].push(q);
        }
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(q) = stack.pop() {
        for &t in &adj[q] {
            if !std::mem::replace(&mut seen[t], true) {
                stack.push(t);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Hierholzer's algorithm from state 0, taking out-arcs in letter order.
/// Returns the circuit as a sequence of arcs `(letter, source)`.
pub fn eulerian_circuit(dfa: &Dfa) -> Result<Vec<Pair>, UnitarizeError> {
    if !dfa.is_balanced() {
        return Err(UnitarizeError::NotBalanced {
            violations: dfa.degree_profile().violations(),
        });
    }
    if !weakly_connected(dfa) {
        return Err(UnitarizeError::Disconnected);
    }
    let n = dfa.n();
    let letters = dfa.alphabet_size();
    let mut next_arc = vec![0usize; n];
    let mut stack: Vec<(usize, Option<Pair>)> = vec![(0, None)];
    let mut circuit = Vec::with_capacity(n * letters);
    while let Some(&(v, arc)) = stack.last() {
        if next_arc[v] < letters {
            let l = next_arc[v];
            next_arc[v] += 1;
            stack.push((dfa.next(v, l), Some(Pair::new(Letter::from_index(l), v))));
        } else {
            stack.pop();
            if let Some(a) = arc {
                circuit.push(a);
            }
        }
    }
    circuit.reverse();
    debug_assert_eq!(circuit.len(), n * letters);
    Ok(circuit)
}

fn eulerian(dfa: &Dfa) -> Result<JointPerm, UnitarizeError> {
    let circuit = eulerian_circuit(dfa)?;
    let n = dfa.n();
    let mut images = vec![Pair::new(Letter::A, 0); 2 * n];
    for (i, arc) in circuit.iter().enumerate() {
        let next = circuit[(i + 1) % circuit.len()];
        images[arc.letter.index() * n + arc.state] = next;
    }
    JointPerm::from_images(n, images)
}

/// True iff `perm` is a bijection whose state components equal the transitions of `dfa`.
pub fn verify_realizes(perm: &JointPerm, dfa: &Dfa) -> bool {
    if perm.n() != dfa.n() || dfa.alphabet_size() != 2 {
        return false;
    }
    let mut hit = vec![false; 2 * perm.n()];
    perm.entries().all(|(from, to)| {
        let fresh = !std::mem::replace(&mut hit[to.letter.index() * perm.n() + to.state], true);
        fresh && to.state == dfa.next(from.state, from.letter.index())
    })
}

/// Existence of a realizing bijection by exhaustive backtracking over the
/// output letter of every arc. Works for any alphabet size and does not
/// consult the degree profile.
pub fn exists_permutation_bruteforce(dfa: &Dfa) -> Result<bool, UnitarizeError> {
    let n = dfa.n();
    if n > BRUTEFORCE_GUARD {
        return Err(UnitarizeError::GuardExceeded {
            n,
            guard: BRUTEFORCE_GUARD,
        });
    }
    let letters = dfa.alphabet_size();
    let arcs: Vec<usize> = (0..letters)
        .flat_map(|l| (0..n).map(move |q| dfa.next(q, l)))
        .collect();
    let mut used = vec![false; letters * n];

    fn assign(arcs: &[usize], letters: usize, n: usize, used: &mut [bool]) -> bool {
        let Some((&target, rest)) = arcs.split_first() else {
            return true;
        };
        for out in 0..letters {
            let slot = out * n + target;
            if !used[slot] {
                used[slot] = true;
                if assign(rest, letters, n, used) {
                    return true;
                }
                used[slot] = false;
            }
        }
        false
    }

    Ok(assign(&arcs, letters, n, &mut used))
}

/// Realization of [`ghz4`] consistent with the entanglement demonstrations:
/// the single 8-cycle `(a,0) (a,1) (a,2) (a,3) (b,1) (b,0) (b,3) (b,2)`.
pub fn ghz4_perm() -> JointPerm {
    use Letter::{A, B};
    let cycle = [
        Pair::new(A, 0),
        Pair::new(A, 1),
        Pair::new(A, 2),
        Pair::new(A, 3),
        Pair::new(B, 1),
        Pair::new(B, 0),
        Pair::new(B, 3),
        Pair::new(B, 2),
    ];
    let entries: Vec<(Pair, Pair)> = (0..cycle.len())
        .map(|i| (cycle[i], cycle[(i + 1) % cycle.len()]))
        .collect();
    let perm = JointPerm::from_map(4, &entries).expect("valid cycle");
    debug_assert!(verify_realizes(&perm, &ghz4()));
    perm
}

// ---------------------------------------------------------------------------
// File format

#[derive(Serialize, Deserialize)]
struct PairDoc {
    letter: String,
    state: usize,
}

#[derive(Serialize, Deserialize)]
struct EntryDoc {
    from: PairDoc,
    to: PairDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PermDoc {
    #[serde(default)]
    qsync_schema: Option<u32>,
    n: usize,
    map: Vec<EntryDoc>,
}

impl From<&JointPerm> for PermDoc {
    fn from(perm: &JointPerm) -> Self {
        let doc = |p: Pair| PairDoc {
            letter: p.letter.to_string(),
            state: p.state,
        };
        PermDoc {
            qsync_schema: Some(SCHEMA_VERSION),
            n: perm.n,
            map: perm
                .entries()
                .map(|(f, t)| EntryDoc {
                    from: doc(f),
                    to: doc(t),
                })
                .collect(),
        }
    }
}

impl TryFrom<PermDoc> for JointPerm {
    type Error = UnitarizeError;
    fn try_from(doc: PermDoc) -> Result<Self, Self::Error> {
        if let Some(v) = doc.qsync_schema {
            if v != SCHEMA_VERSION {
                return Err(UnitarizeError::Syntax(format!(
                    "unsupported schema version {v}"
                )));
            }
        }
        let pair = |p: &PairDoc| -> Result<Pair, UnitarizeError> {
            let mut chars = p.letter.chars();
            let letter = match (chars.next().and_then(Letter::from_char), chars.next()) {
                (Some(l), None) => l,
                _ => return Err(UnitarizeError::Syntax(format!("bad letter {:?}", p.letter))),
            };
            Ok(Pair::new(letter, p.state))
        };
        let entries = doc
            .map
            .iter()
            .map(|e| Ok((pair(&e.from)?, pair(&e.to)?)))
            .collect::<Result<Vec<_>, UnitarizeError>>()?;
        JointPerm::from_map(doc.n, &entries)
    }
}

impl PartialOrd for JointPerm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for JointPerm {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.n, &self.images).cmp(&(other.n, &other.images))
    }
}
