// Entangled register states from the four-state automaton and the word abba.

use qsync::prelude::*;
use qsync::qsim::run_final;

fn report(label: &str, amps: &[(usize, Complex64)]) -> Result<(), Box<dyn std::error::Error>> {
    let out = run_final(&ghz4_perm(), &init_joint("abba", amps, 4)?)?;
    let class = classify_behavior(&out);
    let register = class.register_factor().ok_or("register still entangled")?;
    let split = factor_spectators(&register)?;
    println!("{label}: register {register}");
    println!("    automaton ends in {:?}", class.automaton_basis_state());
    println!(
        "    spectators {:?}, core on {:?}: {}",
        split.spectators, split.core_positions, split.core
    );
    for p in &split.core_positions {
        let s = reduced_spectrum(&register, &Cut::register([*p]))?;
        println!("    S(qubit {p}) = {:.6}", s.entropy_bits);
    }
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let h = 0.5f64.sqrt();
    report(
        "start (|2>+|0>)/sqrt2",
        &[(2, Complex64::new(h, 0.0)), (0, Complex64::new(h, 0.0))],
    )?;
    report(
        "start (|2>+i|3>)/sqrt2",
        &[(2, Complex64::new(h, 0.0)), (3, Complex64::new(0.0, h))],
    )?;
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
