//! Synchronizing automata and their unitary realizations.
//!
//! A deterministic automaton over `{a, b}` is made reversible by letting the
//! input word live in a qubit register: at step `t` a permutation of
//! `(letter, state)` pairs acts on qubit `t` and the automaton qudit. Such a
//! permutation exists exactly when every state has in-degree 2 ([`automaton::Dfa::is_balanced`]).
//! When the register holds a synchronizing word the automaton ends in a fixed
//! state and its initial coherence (or entropy) moves into the register.
//!
//! Modules, bottom up:
//!
//! - [`automaton`]: the DFA model, file format and a zoo of named automata.
//! - [`syncword`]: synchronizing-word search and verification.
//! - [`unitarize`]: constructing and checking realizing permutations.
//! - [`census`]: exact and sampled counts of unitarizable automata.
//! - [`qsim`]: exact sparse simulation of the register and automaton.
//! - [`analysis`]: reduced spectra, entropies, fidelity, AME checks.
//! - [`synth`]: building automata that emit a requested register state.
//! - [`cli`]: the `qsync` command-line front end.

pub mod analysis;
pub mod automaton;
pub mod census;
pub mod cli;
mod linalg;
pub mod qsim;
pub mod suite;
pub mod syncword;
pub mod synth;
pub mod unitarize;

/// Version tag written as `"qsync_schema"` into every emitted document.
pub const SCHEMA_VERSION: u32 = 1;

pub use num_complex::Complex64;

pub mod prelude {
    pub use crate::analysis::{
        ame_check, entropy_pump_check, factor_spectators, fidelity, mutual_information_qr,
        reduced_spectrum, Cut,
    };
    pub use crate::automaton::{zoo, Dfa, Word, ZooParams};
    pub use crate::qsim::{
        classify_behavior, init_joint, run, run_mixed, step, Behavior, MixedEnsemble, Register,
        RegisterState, SparseState,
    };
    pub use crate::syncword::{greedy_sync_word, is_synchronizing_word, shortest_sync_word};
    pub use crate::synth::{synthesize, verify_synthesis, TargetSpec};
    pub use crate::unitarize::{
        ghz4_perm, unitarize, verify_realizes, JointPerm, Letter, Pair, UnitarizeMode,
    };
    pub use num_complex::Complex64;
}
