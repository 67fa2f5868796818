// A synchronizing word moves the automaton's entropy into the register.

use qsync::analysis::ensemble_spectrum;
use qsync::automaton::{example3, swap01};
use qsync::prelude::*;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let perm = unitarize(&example3(4, &swap01(4))?, UnitarizeMode::Eulerian)?;
    let mixed = MixedEnsemble::maximally_mixed(4);
    let pump = entropy_pump_check(&perm, "aba", &mixed)?;
    println!(
        "maximally mixed input: S_in = {:.6}, S_out(R) = {:.6}",
        pump.s_in, pump.s_out_register
    );

    let c = |re: f64, im: f64| Complex64::new(re, im);
    let ensemble = MixedEnsemble::new(vec![
        (
            0.5,
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        ),
        (
            0.3,
            vec![c(0.0, 0.0), c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.0)],
        ),
        (
            0.2,
            vec![c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.5)],
        ),
    ])?;
    println!(
        "rho_Q spectrum {:?}",
        ensemble_spectrum(&ensemble)?.eigenvalues
    );
    let pump = entropy_pump_check(&ghz4_perm(), "abba", &ensemble)?;
    println!(
        "ghz4, word abba: S_in = {:.6}, S_out(R) = {:.6}, automaton ends in {}",
        pump.s_in, pump.s_out_register, pump.final_state
    );

    let pure = init_joint(
        "aab",
        &[
            (0, c(0.5, 0.0)),
            (1, c(0.5, 0.0)),
            (2, c(0.5, 0.0)),
            (3, c(0.5, 0.0)),
        ],
        4,
    )?;
    for (t, s) in run(&ghz4_perm(), &pure)?.iter().enumerate() {
        let s_r = reduced_spectrum(s, &Cut::whole_register(s.k()))?.entropy_bits;
        let s_q = reduced_spectrum(s, &Cut::automaton())?.entropy_bits;
        println!(
            "t={t}: S_R = {s_r:.6}, S_Q = {s_q:.6}, I(Q:R) = {:.6}",
            mutual_information_qr(s)?
        );
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
