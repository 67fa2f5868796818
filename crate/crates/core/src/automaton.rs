//! Deterministic finite automata over small alphabets.
//!
//! A [`Dfa`] stores its transition table row-major by letter: `delta[letter][state]`
//! is the successor of `state` under `letter`, so each row is the arc set of the
//! transition graph for that letter. States are `0..n`.

use std::collections::BTreeSet;
use std::fmt;

use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::SCHEMA_VERSION;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("malformed automaton file: {0}")]
    Syntax(String),
    #[error("unsupported schema version {0}")]
    Schema(u32),
    #[error("automaton must have at least one state")]
    NoStates,
    #[error("alphabet needs at least two letters, got {0}")]
    AlphabetTooSmall(usize),
    #[error("letter {0:?} appears twice in the alphabet")]
    DuplicateLetter(String),
    #[error("letters must be non-empty")]
    EmptyLetter,
    #[error("no transition row for letter {0:?}")]
    MissingRow(String),
    #[error("duplicate transition row for letter {0:?}")]
    DuplicateRow(String),
    #[error("transition row {0:?} does not name a letter of the alphabet")]
    UnknownRow(String),
    #[error("row {letter:?} has {got} entries, expected {expected}")]
    RowLength {
        letter: String,
        got: usize,
        expected: usize,
    },
    #[error("transition {letter:?} from state {state} targets {target}, outside [0, {n})")]
    TargetOutOfRange {
        letter: String,
        state: usize,
        target: i64,
        n: usize,
    },
    #[error("labels array has {got} entries, expected {expected}")]
    LabelCount { got: usize, expected: usize },
    #[error("unknown zoo automaton {0:?}")]
    UnknownZoo(String),
    #[error("example3 needs n >= 3, got {0}")]
    Example3TooSmall(usize),
    #[error("not a permutation of 0..{0}")]
    NotAPermutation(usize),
    #[error("words must contain at least one letter")]
    EmptyWord,
    #[error("{0:?} is not a letter of the alphabet")]
    BadLetter(String),
}

/// A complete DFA: exactly one successor per `(letter, state)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    n: usize,
    alphabet: Vec<String>,
    delta: Vec<Vec<usize>>,
    name: Option<String>,
    labels: Option<Vec<String>>,
}

impl Dfa {
    /// Builds a DFA from its alphabet and one transition row per letter.
    pub fn new<S: Into<String>>(
        alphabet: Vec<S>,
        delta: Vec<Vec<usize>>,
    ) -> Result<Self, AutomatonError> {
        let alphabet: Vec<String> = alphabet.into_iter().map(Into::into).collect();
        check_alphabet(&alphabet)?;
        if delta.len() != alphabet.len() {
            let missing = alphabet.get(delta.len()).cloned().unwrap_or_default();
            return Err(AutomatonError::MissingRow(missing));
        }
        let n = delta.first().map_or(0, Vec::len);
        if n == 0 {
            return Err(AutomatonError::NoStates);
        }
        for (letter, row) in alphabet.iter().zip(&delta) {
            if row.len() != n {
                return Err(AutomatonError::RowLength {
                    letter: letter.clone(),
                    got: row.len(),
                    expected: n,
                });
            }
            if let Some((state, &target)) = row.iter().enumerate().find(|(_, &t)| t >= n) {
                return Err(AutomatonError::TargetOutOfRange {
                    letter: letter.clone(),
                    state,
                    target: target as i64,
                    n,
                });
            }
        }
        Ok(Self {
            n,
            alphabet,
            delta,
            name: None,
            labels: None,
        })
    }

    /// Two-letter automaton over `{a, b}`.
    pub fn binary(a: Vec<usize>, b: Vec<usize>) -> Result<Self, AutomatonError> {
        Self::new(vec!["a", "b"], vec![a, b])
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, AutomatonError> {
        if labels.len() != self.n {
            return Err(AutomatonError::LabelCount {
                got: labels.len(),
                expected: self.n,
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Successor of `state` under `letter`.
    #[inline]
    pub fn next(&self, state: usize, letter: usize) -> usize {
        self.delta[letter][state]
    }

    /// Transition row of one letter, i.e. the arc set of its graph.
    pub fn row(&self, letter: usize) -> &[usize] {
        &self.delta[letter]
    }

    /// True when the alphabet is `["a","b"]` or `["A","B"]`.
    pub fn is_ab_alphabet(&self) -> bool {
        matches!(
            self.alphabet
                .iter()
                .map(String::as_str)
                .collect::<Vec<_>>()
                .as_slice(),
            ["a", "b"] | ["A", "B"]
        )
    }

    /// Left-to-right fold of the transition function over `word`.
    ///
    /// Panics if `q0` or a letter of `word` is out of range.
    pub fn apply_word(&self, word: &Word, q0: usize) -> usize {
        assert!(q0 < self.n, "state {q0} out of range");
        word.letters.iter().fold(q0, |q, &l| self.delta[l][q])
    }

    /// Image of a set of states under `word`.
    pub fn image(&self, word: &Word, states: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        states
            .into_iter()
            .map(|q| self.apply_word(word, q))
            .collect()
    }

    pub fn parse_word(&self, text: &str) -> Result<Word, AutomatonError> {
        Word::parse(text, &self.alphabet)
    }

    pub fn render_word(&self, word: &Word) -> String {
        word.render(&self.alphabet)
    }

    pub fn degree_profile(&self) -> DegreeProfile {
        let mut in_total = vec![0; self.n];
        for row in &self.delta {
            for &target in row {
                in_total[target] += 1;
            }
        }
        DegreeProfile {
            in_total,
            out_total: vec![self.alphabet.len(); self.n],
        }
    }

    /// Every state has total in-degree equal to the alphabet size.
    pub fn is_balanced(&self) -> bool {
        self.degree_profile().is_balanced()
    }

    pub fn from_json(text: &str) -> Result<Self, AutomatonError> {
        let doc: DfaDoc =
            serde_json::from_str(text).map_err(|e| AutomatonError::Syntax(e.to_string()))?;
        doc.into_dfa()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&DfaOut(self)).expect("automaton serialization")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(DfaOut(self)).expect("automaton serialization")
    }
}

impl fmt::Display for Dfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(name) = &self.name {
            writeln!(f, "{name}: {} states", self.n)?;
        } else {
            writeln!(f, "{} states", self.n)?;
        }
        for (letter, row) in self.alphabet.iter().zip(&self.delta) {
            writeln!(f, "  {letter}: {row:?}")?;
        }
        Ok(())
    }
}

fn check_alphabet(alphabet: &[String]) -> Result<(), AutomatonError> {
    if alphabet.len() < 2 {
        return Err(AutomatonError::AlphabetTooSmall(alphabet.len()));
    }
    let mut seen = BTreeSet::new();
    for letter in alphabet {
        if letter.is_empty() {
            return Err(AutomatonError::EmptyLetter);
        }
        if !seen.insert(letter.as_str()) {
            return Err(AutomatonError::DuplicateLetter(letter.clone()));
        }
    }
    Ok(())
}

/// Finite nonempty sequence of letter indices, applied left to right.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<usize>,
}

impl Word {
    pub fn new(letters: Vec<usize>) -> Result<Self, AutomatonError> {
        if letters.is_empty() {
            return Err(AutomatonError::EmptyWord);
        }
        Ok(Self { letters })
    }

    /// Parses a word whose letters are single characters of `alphabet`.
    pub fn parse(text: &str, alphabet: &[String]) -> Result<Self, AutomatonError> {
        let letters = text
            .chars()
            .map(|c| {
                let mut buf = [0u8; 4];
                let c = &*c.encode_utf8(&mut buf);
                alphabet
                    .iter()
                    .position(|l| l == c)
                    .ok_or_else(|| AutomatonError::BadLetter(c.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(letters)
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word { letters }
    }

    pub fn render(&self, alphabet: &[String]) -> String {
        self.letters.iter().map(|&l| alphabet[l].as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeProfile {
    pub in_total: Vec<usize>,
    pub out_total: Vec<usize>,
}

impl DegreeProfile {
    pub fn is_balanced(&self) -> bool {
        self.in_total
            .iter()
            .zip(&self.out_total)
            .all(|(i, o)| i == o)
    }

    /// States whose in-degree differs from their out-degree.
    pub fn violations(&self) -> Vec<usize> {
        self.in_total
            .iter()
            .zip(&self.out_total)
            .enumerate()
            .filter(|(_, (i, o))| i != o)
            .map(|(q, _)| q)
            .collect()
    }
}

// ---------------------------------------------------------------------------
// File format

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DfaDoc {
    #[serde(default)]
    qsync_schema: Option<u32>,
    #[serde(default)]
    name: Option<String>,
    states: usize,
    alphabet: Vec<String>,
    transitions: Rows,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

/// Transition rows in file order, keeping duplicates so they can be rejected.
struct Rows(Vec<(String, Vec<i64>)>);

impl<'de> Deserialize<'de> for Rows {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RowsVisitor;
        impl<'de> Visitor<'de> for RowsVisitor {
            type Value = Rows;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map from letter to an array of target states")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Rows, A::Error> {
                let mut rows = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, Vec<i64>>()? {
                    rows.push((k, v));
                }
                Ok(Rows(rows))
            }
        }
        deserializer.deserialize_map(RowsVisitor)
    }
}

impl DfaDoc {
    fn into_dfa(self) -> Result<Dfa, AutomatonError> {
        if let Some(v) = self.qsync_schema {
            if v != SCHEMA_VERSION {
                return Err(AutomatonError::Schema(v));
            }
        }
        if self.states == 0 {
            return Err(AutomatonError::NoStates);
        }
        check_alphabet(&self.alphabet)?;
        let n = self.states;
        let mut delta: Vec<Option<Vec<usize>>> = vec![None; self.alphabet.len()];
        for (letter, row) in self.transitions.0 {
            let idx = self
                .alphabet
                .iter()
                .position(|l| *l == letter)
                .ok_or_else(|| AutomatonError::UnknownRow(letter.clone()))?;
            if delta[idx].is_some() {
                return Err(AutomatonError::DuplicateRow(letter));
            }
            if row.len() != n {
                return Err(AutomatonError::RowLength {
                    letter,
                    got: row.len(),
                    expected: n,
                });
            }
            let mut targets = Vec::with_capacity(n);
            for (state, &t) in row.iter().enumerate() {
                if t < 0 || t as u64 >= n as u64 {
                    return Err(AutomatonError::TargetOutOfRange {
                        letter: letter.clone(),
                        state,
                        target: t,
                        n,
                    });
                }
                targets.push(t as usize);
            }
            delta[idx] = Some(targets);
        }
        let delta = delta
            .into_iter()
            .zip(&self.alphabet)
            .map(|(row, letter)| row.ok_or_else(|| AutomatonError::MissingRow(letter.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let mut dfa = Dfa::new(self.alphabet, delta)?;
        dfa.name = self.name;
        if let Some(labels) = self.labels {
            dfa = dfa.with_labels(labels)?;
        }
        Ok(dfa)
    }
}

struct DfaOut<'a>(&'a Dfa);

struct RowsOut<'a>(&'a Dfa);

impl Serialize for RowsOut<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.alphabet.len()))?;
        for (letter, row) in self.0.alphabet.iter().zip(&self.0.delta) {
            map.serialize_entry(letter, row)?;
        }
        map.end()
    }
}

impl Serialize for DfaOut<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let dfa = self.0;
        let mut map = s.serialize_map(None)?;
        map.serialize_entry("qsync_schema", &SCHEMA_VERSION)?;
        if let Some(name) = &dfa.name {
            map.serialize_entry("name", name)?;
        }
        map.serialize_entry("states", &dfa.n)?;
        map.serialize_entry("alphabet", &dfa.alphabet)?;
        map.serialize_entry("transitions", &RowsOut(dfa))?;
        if let Some(labels) = &dfa.labels {
            map.serialize_entry("labels", labels)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Dfa {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        DfaDoc::deserialize(deserializer)?
            .into_dfa()
            .map_err(de::Error::custom)
    }
}

impl Serialize for Dfa {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        DfaOut(self).serialize(s)
    }
}

// ---------------------------------------------------------------------------
// Zoo

/// Parameters accepted by [`zoo`]; only `example3` reads them.
#[derive(Debug, Clone, Default)]
pub struct ZooParams {
    pub n: Option<usize>,
    pub pi: Option<Vec<usize>>,
}

pub const ZOO_NAMES: &[&str] = &["example1", "example2", "example3", "ghz4", "robot"];

pub fn zoo(name: &str, params: &ZooParams) -> Result<Dfa, AutomatonError> {
    match name {
        "example1" => Ok(example1()),
        "example2" => Ok(example2()),
        "example3" => {
            let n = params.n.unwrap_or(4);
            match &params.pi {
                Some(pi) => example3(n, pi),
                None => example3(n, &swap01(n)),
            }
        }
        "ghz4" => Ok(ghz4()),
        "robot" => Ok(robot()),
        other => Err(AutomatonError::UnknownZoo(other.to_string())),
    }
}

/// Two states; `a` sends everything to 1, `b` everything to 0.
pub fn example1() -> Dfa {
    Dfa::binary(vec![1, 1], vec![0, 0])
        .unwrap()
        .with_name("example1")
}

/// Three-state synchronizing automaton that admits no unitary realization.
pub fn example2() -> Dfa {
    Dfa::binary(vec![1, 2, 1], vec![0, 1, 1])
        .unwrap()
        .with_name("example2")
}

/// The transposition of states 0 and 1, identity elsewhere.
pub fn swap01(n: usize) -> Vec<usize> {
    let mut pi: Vec<usize> = (0..n).collect();
    if n >= 2 {
        pi.swap(0, 1);
    }
    pi
}

/// The `n`-state cycle family: letter `a` walks `0 -> 1 -> ... -> n-1 -> 1`,
/// and letter `b` is the same graph with every vertex relabeled through `pi`.
pub fn example3(n: usize, pi: &[usize]) -> Result<Dfa, AutomatonError> {
    if n < 3 {
        return Err(AutomatonError::Example3TooSmall(n));
    }
    if !is_permutation(pi, n) {
        return Err(AutomatonError::NotAPermutation(n));
    }
    let a: Vec<usize> = (0..n).map(|q| if q + 1 < n { q + 1 } else { 1 }).collect();
    let mut b = vec![0; n];
    for u in 0..n {
        b[pi[u]] = pi[a[u]];
    }
    Ok(Dfa::binary(a, b)?.with_name(format!("example3(n={n})")))
}

fn is_permutation(pi: &[usize], n: usize) -> bool {
    if pi.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    pi.iter()
        .all(|&p| p < n && !std::mem::replace(&mut seen[p], true))
}

/// Four-state automaton used for the entanglement demonstrations; it is
/// `example3(4, (0 1)(2 3))`.
pub fn ghz4() -> Dfa {
    Dfa::binary(vec![1, 2, 3, 1], vec![3, 0, 0, 2])
        .unwrap()
        .with_name("ghz4")
}

/// Grid side length of the robot automaton.
pub const ROBOT_SIDE: usize = 3;

const FACINGS: [char; 4] = ['N', 'E', 'S', 'W'];

/// State index of the robot at cell `(x, y)` with facing `f` (0=N, 1=E, 2=S, 3=W).
pub fn robot_state(x: usize, y: usize, facing: usize) -> usize {
    (y * ROBOT_SIDE + x) * 4 + facing
}

/// Inverse of [`robot_state`]: `(x, y, facing)`.
pub fn robot_coords(state: usize) -> (usize, usize, usize) {
    let cell = state / 4;
    (cell % ROBOT_SIDE, cell / ROBOT_SIDE, state % 4)
}

/// Robot on a 3x3 grid. `a` steps forward unless that would leave the grid,
/// `b` turns left. `x` grows rightward, `y` grows downward, and facing N
/// decreases `y`.
pub fn robot() -> Dfa {
    let n = ROBOT_SIDE * ROBOT_SIDE * 4;
    let mut a = vec![0; n];
    let mut b = vec![0; n];
    let mut labels = Vec::with_capacity(n);
    for q in 0..n {
        let (x, y, f) = robot_coords(q);
        let (dx, dy): (isize, isize) = match f {
            0 => (0, -1),
            1 => (1, 0),
            2 => (0, 1),
            _ => (-1, 0),
        };
        let (nx, ny) = (x as isize + dx, y as isize + dy);
        let inside =
            (0..ROBOT_SIDE as isize).contains(&nx) && (0..ROBOT_SIDE as isize).contains(&ny);
        a[q] = if inside {
            robot_state(nx as usize, ny as usize, f)
        } else {
            q
        };
        // N -> W -> S -> E -> N
        b[q] = robot_state(x, y, (f + 3) % 4);
        labels.push(format!("({x},{y},{})", FACINGS[f]));
    }
    Dfa::binary(a, b)
        .unwrap()
        .with_name("robot")
        .with_labels(labels)
        .unwrap()
}

/// Block map sending each robot state to its cell index `y * 3 + x`.
pub fn robot_cell_blocks() -> Vec<usize> {
    (0..ROBOT_SIDE * ROBOT_SIDE * 4).map(|q| q / 4).collect()
}
