mod common;

use std::collections::BTreeSet;

use common::{entropy_of, Dense};
use proptest::prelude::*;
use qsync::analysis::{ensemble_spectrum, SpectatorFactoring};
use qsync::automaton::{Dfa, Word};
use qsync::prelude::*;
use qsync::qsim::run_final;
use qsync::syncword::cerny_audit;
use qsync::synth::suffix_levels;
use qsync::unitarize::exists_permutation_bruteforce;

fn dfa_strategy(max_n: usize) -> impl Strategy<Value = Dfa> {
    (1..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec(0..n, n),
            prop::collection::vec(0..n, n),
        )
            .prop_map(|(a, b)| Dfa::binary(a, b).unwrap())
    })
}

/// Balanced: each state is the target of exactly two arcs.
fn balanced_strategy(max_n: usize) -> impl Strategy<Value = Dfa> {
    (1..=max_n).prop_flat_map(|n| {
        let targets: Vec<usize> = (0..n).flat_map(|q| [q, q]).collect();
        Just(targets)
            .prop_shuffle()
            .prop_map(move |t| Dfa::binary(t[..n].to_vec(), t[n..].to_vec()).unwrap())
    })
}

fn perm_strategy(max_n: usize) -> impl Strategy<Value = JointPerm> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs: Vec<Pair> = Letter::ALL
            .into_iter()
            .flat_map(|l| {
                (0..n).map(move |q| Pair {
                    letter: l,
                    state: q,
                })
            })
            .collect();
        Just(pairs)
            .prop_shuffle()
            .prop_map(move |images| JointPerm::from_images(n, images).unwrap())
    })
}

fn word_strategy(max_len: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::bool::ANY, 1..=max_len)
        .prop_map(|v| v.into_iter().map(|b| if b { 'b' } else { 'a' }).collect())
}

fn unit_vector(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
        .prop_filter("nonzero", |v| {
            v.iter().any(|(x, y)| x.abs() + y.abs() > 1e-3)
        })
        .prop_map(|v| {
            let norm = v.iter().map(|(x, y)| x * x + y * y).sum::<f64>().sqrt();
            v.into_iter()
                .map(|(x, y)| Complex64::new(x / norm, y / norm))
                .collect()
        })
}

fn ensemble(n: usize) -> impl Strategy<Value = MixedEnsemble> {
    prop::collection::vec((0.01f64..1.0, unit_vector(n)), 1..=4).prop_map(|members| {
        let total: f64 = members.iter().map(|(p, _)| p).sum();
        MixedEnsemble::new(members.into_iter().map(|(p, v)| (p / total, v)).collect()).unwrap()
    })
}

fn indexed(v: Vec<Complex64>) -> Vec<(usize, Complex64)> {
    v.into_iter().enumerate().collect()
}

fn connected(dfa: &Dfa) -> bool {
    let mut seen = BTreeSet::from([0]);
    let mut stack = vec![0];
    while let Some(q) = stack.pop() {
        for p in 0..dfa.n() {
            let linked = (0..2).any(|l| dfa.next(q, l) == p || dfa.next(p, l) == q);
            if linked && seen.insert(p) {
                stack.push(p);
            }
        }
    }
    seen.len() == dfa.n()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(250))]

    #[test]
    fn balanced_iff_realizable(dfa in dfa_strategy(8)) {
        prop_assert_eq!(dfa.is_balanced(), exists_permutation_bruteforce(&dfa).unwrap());
    }

    #[test]
    fn balanced_automata_are_realizable(dfa in balanced_strategy(8)) {
        prop_assert!(exists_permutation_bruteforce(&dfa).unwrap());
    }

    #[test]
    fn arc_conservation(dfa in dfa_strategy(10)) {
        let p = dfa.degree_profile();
        prop_assert_eq!(p.in_total.iter().sum::<usize>(), 2 * dfa.n());
        prop_assert!(p.out_total.iter().all(|&d| d == 2));
    }

    #[test]
    fn word_application_composes(dfa in dfa_strategy(8), u in word_strategy(6), v in word_strategy(6)) {
        let u = dfa.parse_word(&u).unwrap();
        let v = dfa.parse_word(&v).unwrap();
        let uv = u.concat(&v);
        for q in 0..dfa.n() {
            prop_assert_eq!(dfa.apply_word(&uv, q), dfa.apply_word(&v, dfa.apply_word(&u, q)));
        }
    }

    #[test]
    fn automaton_file_round_trip(dfa in dfa_strategy(8)) {
        let back = Dfa::from_json(&dfa.to_json()).unwrap();
        prop_assert_eq!(&back, &dfa);
        prop_assert_eq!(back.to_json(), dfa.to_json());
    }

    #[test]
    fn unitarization_realizes(dfa in balanced_strategy(8)) {
        let canonical = unitarize(&dfa, UnitarizeMode::Canonical).unwrap();
        prop_assert!(verify_realizes(&canonical, &dfa));
        match unitarize(&dfa, UnitarizeMode::Eulerian) {
            Ok(e) => {
                prop_assert!(connected(&dfa));
                prop_assert!(verify_realizes(&e, &dfa));
                let cycles = e.cycles();
                prop_assert_eq!(cycles.len(), 1);
                prop_assert_eq!(cycles[0].len(), 2 * dfa.n());
            }
            Err(_) => prop_assert!(!connected(&dfa)),
        }
    }

    #[test]
    fn permutation_round_trips(perm in perm_strategy(8)) {
        let inv = perm.inverse();
        for (x, y) in perm.entries() {
            prop_assert_eq!(inv.apply(y), x);
            prop_assert_eq!(inv.apply(inv.apply(perm.apply(perm.apply(x)))), x);
        }
        prop_assert_eq!(JointPerm::from_json(&perm.to_json()).unwrap(), perm);
    }

    #[test]
    fn found_words_synchronize(dfa in dfa_strategy(7)) {
        let shortest = shortest_sync_word(&dfa).unwrap();
        let greedy = greedy_sync_word(&dfa);
        prop_assert_eq!(shortest.is_some(), greedy.is_some());
        if let (Some(s), Some(g)) = (shortest, greedy) {
            prop_assert_eq!(is_synchronizing_word(&dfa, &s.word), Some(s.final_state));
            prop_assert_eq!(is_synchronizing_word(&dfa, &g.word), Some(g.final_state));
            prop_assert!(g.length >= s.length);
        }
    }

    #[test]
    fn shortest_is_minimal(dfa in dfa_strategy(4)) {
        if let Some(s) = shortest_sync_word(&dfa).unwrap() {
            for len in 1..s.length.min(7) {
                for bits in 0..1usize << len {
                    let w = Word::new((0..len).map(|i| bits >> i & 1).collect()).unwrap();
                    prop_assert!(is_synchronizing_word(&dfa, &w).is_none());
                }
            }
        } else {
            // No word up to length 6 works either.
            for len in 1..=6 {
                for bits in 0..1usize << len {
                    let w = Word::new((0..len).map(|i| bits >> i & 1).collect()).unwrap();
                    prop_assert!(is_synchronizing_word(&dfa, &w).is_none());
                }
            }
        }
    }

    #[test]
    fn cerny_bound_on_balanced(dfa in balanced_strategy(6)) {
        if shortest_sync_word(&dfa).unwrap().is_some() {
            let audit = cerny_audit(&dfa).unwrap();
            prop_assert!(audit.within, "{:?}", audit);
        }
    }

    #[test]
    fn support_and_norm_conserved(
        (perm, amps) in perm_strategy(6).prop_flat_map(|p| { let n = p.n(); (Just(p), unit_vector(n)) }),
        word in word_strategy(10),
    ) {
        let s0 = init_joint(&word, &indexed(amps), perm.n()).unwrap();
        for s in run(&perm, &s0).unwrap() {
            prop_assert_eq!(s.support_size(), s0.support_size());
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_dense_oracle(
        (perm, amps) in perm_strategy(4).prop_flat_map(|p| { let n = p.n(); (Just(p), unit_vector(n)) }),
        word in word_strategy(5),
    ) {
        let a = indexed(amps);
        let sparse = run_final(&perm, &init_joint(&word, &a, perm.n()).unwrap()).unwrap();
        let dense = Dense::product(&word, &a, perm.n()).run(&perm);
        for bits in 0..1usize << word.len() {
            let w = common::string_of(bits, word.len());
            for q in 0..perm.n() {
                let x = sparse.amplitude(&Register::parse(&w).unwrap(), q);
                prop_assert!((x - dense.get(&w, q)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn basis_stays_basis(perm in perm_strategy(6), word in word_strategy(10), q in 0usize..6) {
        let q = q % perm.n();
        let out = run_final(&perm, &init_joint(&word, &[(q, Complex64::new(1.0, 0.0))], perm.n()).unwrap()).unwrap();
        let basis = matches!(classify_behavior(&out).behavior, Behavior::Basis { .. });
        prop_assert!(basis);
    }

    #[test]
    fn synchronizing_word_decouples(
        (dfa, amps) in balanced_strategy(6).prop_flat_map(|d| { let n = d.n(); (Just(d), unit_vector(n)) }),
    ) {
        if let Some(r) = shortest_sync_word(&dfa).unwrap() {
            let perm = unitarize(&dfa, UnitarizeMode::Canonical).unwrap();
            let out = run_final(&perm, &init_joint(&r.rendered, &indexed(amps), dfa.n()).unwrap()).unwrap();
            let class = classify_behavior(&out);
            prop_assert_eq!(class.schmidt_rank, 1);
            prop_assert_eq!(class.automaton_basis_state(), Some(r.final_state));
        }
    }

    #[test]
    fn state_files_are_deterministic(
        (perm, amps) in perm_strategy(5).prop_flat_map(|p| { let n = p.n(); (Just(p), unit_vector(n)) }),
        word in word_strategy(8),
    ) {
        let s0 = init_joint(&word, &indexed(amps), perm.n()).unwrap();
        let out = run_final(&perm, &s0).unwrap();
        let text = out.to_json();
        prop_assert_eq!(&text, &run_final(&perm, &s0).unwrap().to_json());
        prop_assert_eq!(SparseState::from_json(&text, Some(perm.n())).unwrap(), out);
    }

    #[test]
    fn purity_symmetry(
        (perm, amps) in perm_strategy(5).prop_flat_map(|p| { let n = p.n(); (Just(p), unit_vector(n)) }),
        word in word_strategy(7),
    ) {
        for s in run(&perm, &init_joint(&word, &indexed(amps), perm.n()).unwrap()).unwrap() {
            let s_r = reduced_spectrum(&s, &Cut::whole_register(s.k())).unwrap().entropy_bits;
            let s_q = reduced_spectrum(&s, &Cut::automaton()).unwrap().entropy_bits;
            prop_assert!((s_r - s_q).abs() < 1e-10);
            prop_assert!((mutual_information_qr(&s).unwrap() - 2.0 * s_r).abs() < 1e-10);
        }
    }

    #[test]
    fn spectra_match_dense_partial_trace(
        (perm, amps) in perm_strategy(3).prop_flat_map(|p| { let n = p.n(); (Just(p), unit_vector(n)) }),
        word in word_strategy(4),
        mask in 1usize..16,
        with_q in prop::bool::ANY,
    ) {
        let k = word.len();
        let positions: Vec<usize> = (1..=k).filter(|t| mask >> (t - 1) & 1 == 1).collect();
        let a = indexed(amps);
        let s = run_final(&perm, &init_joint(&word, &a, perm.n()).unwrap()).unwrap();
        let cut = Cut { positions: positions.iter().copied().collect(), automaton: with_q };
        if let Ok(report) = reduced_spectrum(&s, &cut) {
            let dense = Dense::product(&word, &a, perm.n()).run(&perm);
            let oracle = entropy_of(&dense.reduce(&positions, with_q));
            prop_assert!((report.entropy_bits - oracle).abs() < 1e-9);
            prop_assert!((report.eigenvalues.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn entropy_follows_qubit_relabeling(terms in prop::collection::btree_map(0usize..32, unit_vector(1), 1..10), cut in 1usize..31) {
        let k = 5;
        let norm: f64 = terms.values().map(|v| v[0].norm_sqr()).sum::<f64>().sqrt();
        let list: Vec<(String, Complex64)> = terms.iter().map(|(&b, v)| (common::string_of(b, k), v[0] / norm)).collect();
        let refs: Vec<(&str, Complex64)> = list.iter().map(|(s, c)| (s.as_str(), *c)).collect();
        let s = RegisterState::from_terms(&refs).unwrap();
        let reversed: Vec<(String, Complex64)> = list.iter().map(|(s, c)| (s.chars().rev().collect(), *c)).collect();
        let rrefs: Vec<(&str, Complex64)> = reversed.iter().map(|(s, c)| (s.as_str(), *c)).collect();
        let r = RegisterState::from_terms(&rrefs).unwrap();
        let positions: Vec<usize> = (1..=k).filter(|t| cut >> (t - 1) & 1 == 1).collect();
        let mirrored: Vec<usize> = positions.iter().map(|p| k + 1 - p).collect();
        let a = reduced_spectrum(&s, &Cut::register(positions)).unwrap().entropy_bits;
        let b = reduced_spectrum(&r, &Cut::register(mirrored)).unwrap().entropy_bits;
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn spectators_reconstruct(terms in prop::collection::btree_map(0usize..8, unit_vector(1), 1..6), fixed in prop::collection::vec(prop::bool::ANY, 3)) {
        // Interleave three fixed letters with a random three-qubit core.
        let norm: f64 = terms.values().map(|v| v[0].norm_sqr()).sum::<f64>().sqrt();
        let list: Vec<(String, Complex64)> = terms
            .iter()
            .map(|(&b, v)| {
                let core = common::string_of(b, 3);
                let mut s = String::new();
                for (i, ch) in core.chars().enumerate() {
                    s.push(if fixed[i] { 'b' } else { 'a' });
                    s.push(ch);
                }
                (s, v[0] / norm)
            })
            .collect();
        let refs: Vec<(&str, Complex64)> = list.iter().map(|(s, c)| (s.as_str(), *c)).collect();
        let s = RegisterState::from_terms(&refs).unwrap();
        let f: SpectatorFactoring = factor_spectators(&s).unwrap();
        for p in [1, 3, 5] {
            prop_assert!(f.spectators.iter().any(|&(q, _)| q == p));
        }
        prop_assert!((fidelity(&f.reconstruct(), &s).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn entropy_pump_on_ghz4(e in ensemble(4)) {
        let p = entropy_pump_check(&ghz4_perm(), "abba", &e).unwrap();
        prop_assert!(p.delta < 1e-9);
        prop_assert!((p.s_in - ensemble_spectrum(&e).unwrap().entropy_bits).abs() < 1e-12);
    }

    #[test]
    fn ame_state_breaks_without_any_sign(flip in 0usize..8) {
        let strings = ["aaaaa", "aaabb", "abbaa", "bbaba", "abbbb", "bbaab", "babba", "babab"];
        let w = 1.0 / 8f64.sqrt();
        let terms: Vec<(&str, Complex64)> = strings
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let sign = if s == "abbbb" || s == "babab" { -1.0 } else { 1.0 };
                (s, Complex64::new(if i == flip { -sign * w } else { sign * w }, 0.0))
            })
            .collect();
        let s = RegisterState::from_terms(&terms).unwrap();
        prop_assert!(!ame_check(&s).unwrap().is_ame);
    }
}

fn spec_strategy() -> impl Strategy<Value = TargetSpec> {
    (1usize..=6)
        .prop_flat_map(|k| {
            let strings = prop::collection::btree_set(0usize..1 << k, 1..=8.min(1 << k));
            (
                Just(k),
                strings,
                word_strategy(k).prop_map(move |w| w[..k.min(w.len())].to_string()),
            )
        })
        .prop_filter("word length", |(k, _, w)| w.len() == *k)
        .prop_flat_map(|(k, strings, word)| {
            let m = strings.len();
            (Just(k), Just(strings), Just(word), unit_vector(m))
        })
        .prop_map(|(k, strings, word, coeffs)| {
            let list: Vec<String> = strings.iter().map(|&b| common::string_of(b, k)).collect();
            let terms: Vec<(&str, Complex64)> =
                list.iter().map(String::as_str).zip(coeffs).collect();
            TargetSpec::new(&terms, Some(&word)).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn synthesis_is_exact(spec in spec_strategy()) {
        let r = synthesize(&spec).unwrap();
        prop_assert!(verify_synthesis(&r, &spec));
        prop_assert_eq!(r.n(), suffix_levels(&spec.strings()).unwrap().iter().sum::<usize>());
        // The input word resets every branch state.
        let w = r.dfa.parse_word(&spec.input_word().to_string()).unwrap();
        let finals: BTreeSet<usize> = r.branch_states.iter().map(|(_, q)| r.dfa.apply_word(&w, *q)).collect();
        prop_assert_eq!(finals.into_iter().collect::<Vec<_>>(), vec![r.final_state]);
        // Coefficients do not reach the automaton.
        let strings: Vec<String> = spec.strings().iter().map(|s| s.to_string()).collect();
        let refs: Vec<&str> = strings.iter().map(String::as_str).collect();
        let flat = TargetSpec::uniform(&refs, Some(&spec.input_word().to_string())).unwrap();
        let r2 = synthesize(&flat).unwrap();
        prop_assert_eq!(r2.perm, r.perm);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn one_automaton_serves_every_sub_superposition(spec in spec_strategy(), mask in 1usize..256, seed_coeffs in unit_vector(8)) {
        let r = synthesize(&spec).unwrap();
        let chosen: Vec<usize> = (0..r.branch_states.len()).filter(|i| mask >> i & 1 == 1).collect();
        prop_assume!(!chosen.is_empty());
        let norm: f64 = chosen.iter().map(|&i| seed_coeffs[i].norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let strings: Vec<String> = chosen.iter().map(|&i| r.branch_states[i].0.to_string()).collect();
        let terms: Vec<(&str, Complex64)> =
            chosen.iter().zip(&strings).map(|(&i, s)| (s.as_str(), seed_coeffs[i] / norm)).collect();
        let sub = TargetSpec::new(&terms, Some(&spec.input_word().to_string())).unwrap();
        let init: Vec<(usize, Complex64)> =
            chosen.iter().map(|&i| (r.branch_states[i].1, seed_coeffs[i] / norm)).collect();
        let out = run_final(&r.perm, &init_joint(&spec.input_word().to_string(), &init, r.n()).unwrap()).unwrap();
        let expected = sub.target_state().with_automaton(r.final_state, r.n()).unwrap();
        for (reg, q, c) in expected.terms() {
            prop_assert!((out.amplitude(reg, q) - c).norm() < 1e-12);
        }
        prop_assert_eq!(out.support_size(), expected.support_size());
    }
}
