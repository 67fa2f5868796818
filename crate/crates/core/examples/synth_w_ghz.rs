// Automata that write W and GHZ states into a three-qubit register.

use qsync::prelude::*;
use qsync::qsim::run_final;
use qsync::synth::suffix_levels;

fn build(label: &str, spec: &TargetSpec) -> Result<(), Box<dyn std::error::Error>> {
    let r = synthesize(spec)?;
    let s0 = r.initial_state(spec)?;
    let out = run_final(&r.perm, &s0)?;
    let register = classify_behavior(&out)
        .register_factor()
        .ok_or("not decoupled")?;
    println!(
        "{label}: {} states, levels {:?}, final state {}",
        r.n(),
        r.level_sizes,
        r.final_state
    );
    println!(
        "    branches {:?}",
        r.branch_states
            .iter()
            .map(|(w, q)| format!("{w}:{q}"))
            .collect::<Vec<_>>()
    );
    println!("    output {register}");
    println!(
        "    fidelity {:.12}, verified {}",
        fidelity(&register, &spec.target_state())?,
        verify_synthesis(&r, spec)
    );
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let w = TargetSpec::uniform(&["aab", "aba", "baa"], Some("aaa"))?;
    build("W", &w)?;
    let ghz = TargetSpec::new(
        &[
            ("aaa", Complex64::new(0.6, 0.0)),
            ("bbb", Complex64::new(0.0, 0.8)),
        ],
        Some("aaa"),
    )?;
    build("GHZ", &ghz)?;
    println!("suffix levels of W: {:?}", suffix_levels(&w.strings())?);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
