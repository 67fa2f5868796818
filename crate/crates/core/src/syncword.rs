//! Synchronizing words: verification, exact subset search, greedy pair merging,
//! and the Černý bound audit.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::automaton::{Dfa, Word};

/// Default cap on the number of states for subset search.
pub const DEFAULT_SUBSET_GUARD: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyncError {
    #[error("subset search limited to {guard} states, automaton has {n}; use greedy mode")]
    GuardExceeded { n: usize, guard: usize },
    #[error("automaton is not synchronizing")]
    NotSynchronizing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SyncMethod {
    SubsetBfs,
    GreedyPairs,
    Verify,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SyncReport {
    #[serde(skip)]
    pub word: Word,
    #[serde(rename = "word")]
    pub rendered: String,
    #[serde(rename = "final")]
    pub final_state: usize,
    pub length: usize,
    pub method: SyncMethod,
}

impl SyncReport {
    fn new(dfa: &Dfa, word: Word, final_state: usize, method: SyncMethod) -> Self {
        Self {
            rendered: dfa.render_word(&word),
            length: word.len(),
            word,
            final_state,
            method,
        }
    }
}

/// Returns the common final state if `word` synchronizes `dfa`.
pub fn is_synchronizing_word(dfa: &Dfa, word: &Word) -> Option<usize> {
    let first = dfa.apply_word(word, 0);
    (1..dfa.n())
        .all(|q| dfa.apply_word(word, q) == first)
        .then_some(first)
}

/// [`is_synchronizing_word`] packaged as a report.
pub fn verify(dfa: &Dfa, word: &Word) -> Option<SyncReport> {
    is_synchronizing_word(dfa, word)
        .map(|q| SyncReport::new(dfa, word.clone(), q, SyncMethod::Verify))
}

/// Shortest synchronizing word by breadth-first search over the subset
/// automaton, ties broken lexicographically in alphabet order.
pub fn shortest_sync_word(dfa: &Dfa) -> Result<Option<SyncReport>, SyncError> {
    shortest_sync_word_with_guard(dfa, DEFAULT_SUBSET_GUARD)
}

pub fn shortest_sync_word_with_guard(
    dfa: &Dfa,
    guard: usize,
) -> Result<Option<SyncReport>, SyncError> {
    subset_bfs(dfa, guard, |set| set.count_ones() == 1)
}

/// Shortest word sending every state to `target`; `None` if there is none.
pub fn shortest_sync_word_to(dfa: &Dfa, target: usize) -> Result<Option<SyncReport>, SyncError> {
    assert!(target < dfa.n(), "target state out of range");
    subset_bfs(dfa, DEFAULT_SUBSET_GUARD, |set| set == 1u64 << target)
}

fn subset_bfs(
    dfa: &Dfa,
    guard: usize,
    is_goal: impl Fn(u64) -> bool,
) -> Result<Option<SyncReport>, SyncError> {
    let n = dfa.n();
    let guard = guard.min(64);
    if n > guard {
        return Err(SyncError::GuardExceeded { n, guard });
    }
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let letters = dfa.alphabet_size();
    let image = |set: u64, letter: usize| {
        let mut out = 0u64;
        let mut rest = set;
        while rest != 0 {
            let q = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            out |= 1u64 << dfa.next(q, letter);
        }
        out
    };
    let mut parent: HashMap<u64, (u64, usize)> = HashMap::new();
    let mut queue = VecDeque::from([full]);
    parent.insert(full, (full, usize::MAX));
    while let Some(set) = queue.pop_front() {
        for letter in 0..letters {
            let next = image(set, letter);
            if is_goal(next) {
                let mut letters_rev = vec![letter];
                let mut cur = set;
                while cur != full {
                    let (prev, l) = parent[&cur];
                    letters_rev.push(l);
                    cur = prev;
                }
                letters_rev.reverse();
                let word = Word::new(letters_rev).expect("nonempty");
                let final_state = next.trailing_zeros() as usize;
                return Ok(Some(SyncReport::new(
                    dfa,
                    word,
                    final_state,
                    SyncMethod::SubsetBfs,
                )));
            }
            if parent.contains_key(&next) {
                continue;
            }
            parent.insert(next, (set, letter));
            queue.push_back(next);
        }
    }
    Ok(None)
}

/// Shortest word merging states `p` and `q`, by BFS on the pair automaton.
pub fn merging_word(dfa: &Dfa, p: usize, q: usize) -> Option<Vec<usize>> {
    let n = dfa.n();
    if p == q {
        return Some(Vec::new());
    }
    let key = |a: usize, b: usize| if a < b { a * n + b } else { b * n + a };
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n * n];
    let start = key(p, q);
    parent[start] = Some((start, usize::MAX));
    let mut queue = VecDeque::from([(p.min(q), p.max(q))]);
    while let Some((a, b)) = queue.pop_front() {
        for letter in 0..dfa.alphabet_size() {
            let (na, nb) = (dfa.next(a, letter), dfa.next(b, letter));
            if na == nb {
                let mut word = vec![letter];
                let mut cur = key(a, b);
                while cur != start {
                    let (prev, l) = parent[cur].expect("visited");
                    word.push(l);
                    cur = prev;
                }
                word.reverse();
                return Some(word);
            }
            let k = key(na, nb);
            if parent[k].is_none() {
                parent[k] = Some((key(a, b), letter));
                queue.push_back((na.min(nb), na.max(nb)));
            }
        }
    }
    None
}

/// Greedy pair merging: repeatedly merge the lexicographically smallest pair
/// of the current image with a shortest pair-merging word.
pub fn greedy_sync_word(dfa: &Dfa) -> Option<SyncReport> {
    let mut image: Vec<usize> = (0..dfa.n()).collect();
    let mut letters = Vec::new();
    while image.len() > 1 {
        let piece = merging_word(dfa, image[0], image[1])?;
        for &l in &piece {
            for q in image.iter_mut() {
                *q = dfa.next(*q, l);
            }
        }
        image.sort_unstable();
        image.dedup();
        letters.extend(piece);
    }
    if letters.is_empty() {
        // n == 1: every nonempty word synchronizes.
        letters.push(0);
    }
    let word = Word::new(letters).expect("nonempty");
    let final_state = dfa.apply_word(&word, 0);
    Some(SyncReport::new(
        dfa,
        word,
        final_state,
        SyncMethod::GreedyPairs,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CernyAudit {
    pub length: usize,
    pub bound: usize,
    pub within: bool,
}

/// Compares the shortest synchronizing word length with `max((n - 1)^2, 1)`;
/// words are nonempty, so one state still needs one letter.
pub fn cerny_audit(dfa: &Dfa) -> Result<CernyAudit, SyncError> {
    let report = shortest_sync_word(dfa)?.ok_or(SyncError::NotSynchronizing)?;
    let bound = (dfa.n() - 1).pow(2).max(1);
    Ok(CernyAudit {
        length: report.length,
        bound,
        within: report.length <= bound,
    })
}

/// Returns the block reached from every state, if all images share one block.
pub fn synchronizes_to_class(dfa: &Dfa, word: &Word, block_of: &[usize]) -> Option<usize> {
    assert_eq!(block_of.len(), dfa.n(), "block map must cover every state");
    let first = block_of[dfa.apply_word(word, 0)];
    (1..dfa.n())
        .all(|q| block_of[dfa.apply_word(word, q)] == first)
        .then_some(first)
}

/// Reset word `a^((n-1) mod 2) (ba)^((n-1)/2)` for `example3(n, swap01)`.
/// It has length `n - 1` and ends in state 1.
pub fn example3_reset_word(n: usize) -> Word {
    let mut letters = vec![0; (n - 1) % 2];
    for _ in 0..(n - 1) / 2 {
        letters.extend([1, 0]);
    }
    Word::new(letters).expect("n >= 2")
}

/// The same letters in the other order, `(ba)^((n-1)/2) a^((n-1) mod 2)`.
/// Read left to right this fails to synchronize `example3(n, swap01)` for even `n`.
pub fn example3_reset_word_literal(n: usize) -> Word {
    let mut letters = Vec::new();
    for _ in 0..(n - 1) / 2 {
        letters.extend([1, 0]);
    }
    letters.extend(std::iter::repeat_n(0, (n - 1) % 2));
    Word::new(letters).expect("n >= 2")
}
