// A 31-state automaton whose output is a five-qubit AME state.

use qsync::prelude::*;
use qsync::qsim::run_final;
use qsync::suite::ame_spec;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ame_spec();
    let r = synthesize(&spec)?;
    println!("{} states, levels {:?}", r.n(), r.level_sizes);
    let out = run_final(&r.perm, &r.initial_state(&spec)?)?;
    let class = classify_behavior(&out);
    println!("automaton ends in {:?}", class.automaton_basis_state());
    let register = class.register_factor().ok_or("not decoupled")?;
    let report = ame_check(&register)?;
    println!(
        "{} two-qubit marginals checked, AME: {}, worst deviation {:.2e}",
        report.subsets_checked, report.is_ame, report.worst_deviation
    );
    let s = reduced_spectrum(&register, &Cut::register([1, 2]))?;
    println!(
        "marginal on qubits 1,2: {:?}, {:.6} bits",
        s.eigenvalues, s.entropy_bits
    );
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
