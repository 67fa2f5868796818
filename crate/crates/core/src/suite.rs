//! Reproduction suite run by `qsync paper-suite`.
//!
//! Every check recomputes a published example end to end. Known misprints
//! in the source displays are reported as expected divergences with the
//! value that was actually reproduced.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{
    ame_check, entropy_pump_check, factor_spectators, fidelity, reduced_spectrum, Cut,
};
use crate::automaton::{
    example1, example2, example3, ghz4, robot, robot_cell_blocks, swap01, Dfa, Word,
};
use crate::census::{enumerate, f_qdfa, f_stirling, n_dfa, n_qdfa, ratio};
use crate::qsim::{classify_behavior, init_joint, run_final, MixedEnsemble, Register, SparseState};
use crate::syncword::{
    example3_reset_word, example3_reset_word_literal, is_synchronizing_word, shortest_sync_word,
    shortest_sync_word_to, synchronizes_to_class,
};
use crate::synth::{synthesize, verify_synthesis, TargetSpec};
use crate::unitarize::{
    ghz4_perm, unitarize, verify_realizes, JointPerm, Letter, Pair, UnitarizeError, UnitarizeMode,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    ExpectedDivergence,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::ExpectedDivergence => "ERRATUM",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Entry {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub entries: Vec<Entry>,
    pub passed: usize,
    pub failed: usize,
    pub expected_divergences: usize,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn table(&self) -> String {
        let width = self.entries.iter().map(|e| e.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!(
                "{:<8} {:<width$}  {}\n",
                e.status.to_string(),
                e.name,
                e.detail
            ));
        }
        out.push_str(&format!(
            "{} passed, {} failed, {} expected divergences\n",
            self.passed, self.failed, self.expected_divergences
        ));
        out
    }
}

fn check(name: &'static str, ok: bool, detail: impl Into<String>) -> Entry {
    Entry {
        name,
        status: if ok { Status::Pass } else { Status::Fail },
        detail: detail.into(),
    }
}

fn erratum(name: &'static str, reproduced: bool, detail: impl Into<String>) -> Entry {
    Entry {
        name,
        status: if reproduced {
            Status::ExpectedDivergence
        } else {
            Status::Fail
        },
        detail: detail.into(),
    }
}

const EXACT: f64 = 1e-12;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn word(dfa: &Dfa, text: &str) -> Word {
    dfa.parse_word(text).expect("static word")
}

/// Each listed `(register, state, amplitude)` is present and nothing else is.
fn state_matches(s: &SparseState, expected: &[(&str, usize, Complex64)]) -> bool {
    s.support_size() == expected.len()
        && expected.iter().all(|&(r, q, a)| {
            Register::parse(r)
                .map(|r| (s.amplitude(&r, q) - a).norm() <= EXACT)
                .unwrap_or(false)
        })
}

fn phased(mags: &[f64]) -> Vec<Complex64> {
    mags.iter()
        .enumerate()
        .map(|(j, &m)| Complex64::from_polar(m, 0.7 * j as f64 + 0.3))
        .collect()
}

fn realizability() -> Entry {
    let mut detail = Vec::new();
    let mut ok = true;
    for n in [2usize, 3] {
        match enumerate(n) {
            Ok(e) => {
                ok &= e.balanced == e.realizable
                    && num_bigint::BigUint::from(e.balanced) == n_qdfa(n);
                detail.push(format!(
                    "n={n}: {}/{} balanced, {} realizable",
                    e.balanced, e.total, e.realizable
                ));
            }
            Err(err) => {
                ok = false;
                detail.push(err.to_string());
            }
        }
    }
    check("balanced iff realizable", ok, detail.join("; "))
}

fn counting() -> Entry {
    let stirling_err = (f_stirling(10) / f_qdfa(10).value - 1.0).abs();
    let ok = n_dfa(3) == 729u32.into()
        && f_qdfa(2).value == 0.375
        && f_qdfa(3).exact == ratio(90, 729)
        && stirling_err < 0.05;
    check(
        "counting",
        ok,
        format!(
            "N_DFA(3)={}, f(3)={}, stirling rel. error at 10 = {stirling_err:.4}",
            n_dfa(3),
            f_qdfa(3).exact
        ),
    )
}

fn example_one() -> Entry {
    let dfa = example1();
    let to0 = shortest_sync_word_to(&dfa, 0).ok().flatten();
    let to1 = shortest_sync_word_to(&dfa, 1).ok().flatten();
    let words_ok = matches!((&to0, &to1), (Some(x), Some(y)) if x.length == 1 && y.length == 1);
    let Ok(perm) = unitarize(&dfa, UnitarizeMode::Canonical) else {
        return check("example1", false, "unitarization failed");
    };
    let table = [
        (Pair::new(Letter::A, 0), Pair::new(Letter::A, 1)),
        (Pair::new(Letter::A, 1), Pair::new(Letter::B, 1)),
        (Pair::new(Letter::B, 0), Pair::new(Letter::A, 0)),
        (Pair::new(Letter::B, 1), Pair::new(Letter::B, 0)),
    ];
    let printed = JointPerm::from_map(2, &table)
        .map(|p| p == perm)
        .unwrap_or(false);
    let (alpha, beta) = (Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8));
    let stepped = init_joint("a", &[(0, alpha), (1, beta)], 2)
        .and_then(|s| run_final(&perm, &s))
        .map(|s| state_matches(&s, &[("a", 1, alpha), ("b", 1, beta)]))
        .unwrap_or(false);
    check(
        "example1",
        words_ok && verify_realizes(&perm, &dfa) && printed && stepped,
        "reset words b->0, a->1; printed permutation; (α|a>+β|b>)|1>",
    )
}

fn example_two() -> Entry {
    let dfa = example2();
    let not_unitary = matches!(
        unitarize(&dfa, UnitarizeMode::Canonical),
        Err(UnitarizeError::NotBalanced { .. })
    );
    let sw = shortest_sync_word(&dfa).ok().flatten();
    let ok = !dfa.is_balanced() && not_unitary && sw.as_ref().is_some_and(|r| r.rendered == "ab");
    check("example2", ok, "synchronized by \"ab\" but not balanced")
}

fn example_two_degrees() -> Entry {
    let d = example2().degree_profile();
    erratum(
        "example2 in-degrees",
        d.in_total == [1, 4, 1],
        format!(
            "counted in-degrees {:?}; the text says vertex 1 has three",
            d.in_total
        ),
    )
}

fn example_three() -> Vec<Entry> {
    let mut lengths = Vec::new();
    let mut ok = true;
    for n in 3..=8 {
        let dfa = example3(n, &swap01(n)).expect("n >= 3");
        let len = shortest_sync_word(&dfa)
            .ok()
            .flatten()
            .map_or(0, |r| r.length);
        ok &= len == n - 1;
        lengths.push(len);
    }
    let family = check(
        "example3 reset lengths",
        ok,
        format!("n=3..8 -> {lengths:?}"),
    );

    let dfa = example3(4, &swap01(4)).unwrap();
    let amps = phased(&[0.1, 0.2, 0.3, 0.86f64.sqrt()]);
    let evolved = unitarize(&dfa, UnitarizeMode::Eulerian)
        .ok()
        .and_then(|perm| {
            let init: Vec<(usize, Complex64)> = amps.iter().copied().enumerate().collect();
            run_final(&perm, &init_joint("aba", &init, 4).ok()?).ok()
        })
        .is_some_and(|s| {
            state_matches(
                &s,
                &[
                    ("aba", 1, amps[0]),
                    ("abb", 1, amps[1]),
                    ("aaa", 1, amps[2]),
                    ("bba", 1, amps[3]),
                ],
            )
        });
    let sim = check(
        "example3 superposition",
        evolved,
        "(α|aba>+β|abb>+γ|aaa>+δ|bba>)|1>",
    );

    let alt_ok = (3..=8).all(|n| {
        let dfa = example3(n, &swap01(n)).unwrap();
        is_synchronizing_word(&dfa, &example3_reset_word(n)).is_some()
    });
    let literal_fails: Vec<usize> = (3..=8)
        .filter(|&n| {
            is_synchronizing_word(
                &example3(n, &swap01(n)).unwrap(),
                &example3_reset_word_literal(n),
            )
            .is_none()
        })
        .collect();
    let word = erratum(
        "example3 reset word",
        alt_ok && literal_fails.iter().all(|n| n % 2 == 0) && !literal_fails.is_empty(),
        format!("printed order fails for n in {literal_fails:?}; a^((n-1) mod 2)(ba)^((n-1)/2) works for n=3..8"),
    );
    vec![family, sim, word]
}

fn ghz_four() -> Vec<Entry> {
    let perm = ghz4_perm();
    let dfa = ghz4();
    let structure = verify_realizes(&perm, &dfa)
        && perm.cycles().len() == 1
        && unitarize(&dfa, UnitarizeMode::Eulerian).is_ok_and(|e| e == perm);
    let mut out = vec![check(
        "ghz4 reconstruction",
        structure,
        "single 8-cycle equal to the Eulerian unitarization",
    )];

    let a = phased(&[0.1, 0.3, 0.5, 0.65f64.sqrt()]);
    let init: Vec<(usize, Complex64)> = a.iter().copied().enumerate().collect();
    let aab = init_joint("aab", &init, 4)
        .and_then(|s| run_final(&perm, &s))
        .is_ok_and(|s| {
            state_matches(
                &s,
                &[
                    ("aaa", 0, a[0]),
                    ("abb", 0, a[2]),
                    ("baa", 0, a[3]),
                    ("aab", 2, a[1]),
                ],
            ) && classify_behavior(&s).schmidt_rank == 2
        });
    out.push(check(
        "ghz4 entangling run",
        aab,
        "(α|aaa>+γ|abb>+δ|baa>)|0> + β|aab>|2>",
    ));

    let (beta, delta) = (Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8));
    let abba = init_joint("abba", &[(2, beta), (0, delta)], 4)
        .and_then(|s| run_final(&perm, &s))
        .is_ok_and(|s| state_matches(&s, &[("abaa", 1, beta), ("abbb", 1, delta)]));
    out.push(check("ghz4 bipartite run", abba, "|a>|b>(β|aa>+δ|bb>)|1>"));

    let h = 0.5f64.sqrt();
    let (gamma, delta) = (c(h), Complex64::new(0.0, h));
    let tri = init_joint("abba", &[(2, gamma), (3, delta)], 4).and_then(|s| run_final(&perm, &s));
    let reproduced = tri.is_ok_and(|s| {
        let class = classify_behavior(&s);
        let Some(reg) = class.register_factor() else {
            return false;
        };
        let Ok(f) = factor_spectators(&reg) else {
            return false;
        };
        let bipartitions_ok = [vec![1usize], vec![2], vec![3]].iter().all(|cut| {
            reduced_spectrum(&f.core, &Cut::register(cut.iter().copied()))
                .is_ok_and(|r| (r.entropy_bits - 1.0).abs() < 1e-9)
        });
        state_matches(&s, &[("abaa", 1, gamma), ("bbbb", 1, delta)])
            && f.spectators == [(2, Letter::B)]
            && f.core_positions == [1, 3, 4]
            && bipartitions_ok
    });
    out.push(erratum(
        "ghz4 tripartite run",
        reproduced,
        "γ|abaa>+δ|bbbb>: spectator qubit 2 = b, GHZ on qubits 1,3,4 (printed with spectator on qubit 1)",
    ));
    out
}

fn synthesis() -> Vec<Entry> {
    let mut out = Vec::new();
    let w = TargetSpec::uniform(&["aab", "aba", "baa"], Some("aaa")).unwrap();
    out.push(synth_entry("synthesis W", &w, None));
    let ghz = TargetSpec::new(
        &[("aaa", c(0.6)), ("bbb", Complex64::new(0.0, 0.8))],
        Some("aaa"),
    )
    .unwrap();
    out.push(synth_entry("synthesis GHZ", &ghz, None));
    out.push(synth_entry("synthesis AME", &ame_spec(), Some(31)));
    out
}

/// The eight-term five-qubit AME target with its two negative signs.
pub fn ame_spec() -> TargetSpec {
    let strings = [
        "aaaaa", "aaabb", "abbaa", "bbaba", "abbbb", "bbaab", "babba", "babab",
    ];
    let w = 1.0 / 8f64.sqrt();
    let terms: Vec<(&str, Complex64)> = strings
        .iter()
        .map(|&s| (s, c(if s == "abbbb" || s == "babab" { -w } else { w })))
        .collect();
    TargetSpec::new(&terms, Some("bbbbb")).expect("normalized")
}

fn synth_entry(name: &'static str, spec: &TargetSpec, states: Option<usize>) -> Entry {
    let Ok(r) = synthesize(spec) else {
        return check(name, false, "synthesis failed");
    };
    let verified = verify_synthesis(&r, spec);
    let output = r
        .initial_state(spec)
        .ok()
        .and_then(|s| run_final(&r.perm, &s).ok())
        .and_then(|s| classify_behavior(&s).register_factor());
    let fid = output
        .as_ref()
        .and_then(|o| fidelity(o, &spec.target_state()).ok())
        .unwrap_or(0.0);
    let mut ok = verified && (fid - 1.0).abs() < EXACT && states.is_none_or(|n| n == r.n());
    let mut detail = format!("{} states, fidelity {fid:.12}", r.n());
    if spec.k() == 5 {
        let ame = output.as_ref().and_then(|o| ame_check(o).ok());
        ok &= ame.as_ref().is_some_and(|a| a.is_ame);
        if let Some(a) = ame {
            detail.push_str(&format!(", AME worst deviation {:.1e}", a.worst_deviation));
        }
    }
    check(name, ok, detail)
}

fn entropy_pump(seed: u64) -> Entry {
    let perm = ghz4_perm();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let members = (0..3)
            .map(|_| {
                let v: Vec<Complex64> = (0..4)
                    .map(|_| {
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                    })
                    .collect();
                let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                (
                    rng.random_range(0.05..1.0),
                    v.into_iter().map(|x| x / norm).collect::<Vec<_>>(),
                )
            })
            .collect::<Vec<_>>();
        let total: f64 = members.iter().map(|(p, _)| p).sum();
        let members = members.into_iter().map(|(p, v)| (p / total, v)).collect();
        let Ok(e) = MixedEnsemble::new(members) else {
            return check("entropy pump", false, "bad ensemble");
        };
        match entropy_pump_check(&perm, "abba", &e) {
            Ok(p) => worst = worst.max(p.delta),
            Err(err) => return check("entropy pump", false, err.to_string()),
        }
    }
    check(
        "entropy pump",
        worst < 1e-9,
        format!("100 ensembles, max |S_out - S_in| = {worst:.1e}"),
    )
}

fn robot_cell() -> Entry {
    let dfa = robot();
    let block = synchronizes_to_class(&dfa, &word(&dfa, "aabaababa"), &robot_cell_blocks());
    check(
        "robot",
        block == Some(4) && !dfa.is_balanced(),
        "\"aabaababa\" sends all 36 states to cell (1,1)",
    )
}

pub fn run_suite(seed: u64) -> SuiteReport {
    let mut entries = vec![
        realizability(),
        counting(),
        example_one(),
        example_two(),
        example_two_degrees(),
    ];
    entries.extend(example_three());
    entries.extend(ghz_four());
    entries.extend(synthesis());
    entries.push(entropy_pump(seed));
    entries.push(robot_cell());
    let count = |s: Status| entries.iter().filter(|e| e.status == s).count();
    SuiteReport {
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        expected_divergences: count(Status::ExpectedDivergence),
        entries,
    }
}
