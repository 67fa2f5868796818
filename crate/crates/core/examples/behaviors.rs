// The three kinds of register/automaton dynamics on the four-state automaton.

use qsync::prelude::*;
use qsync::qsim::run_final;

fn show(label: &str, s: &SparseState) {
    let class = classify_behavior(s);
    let kind = match class.behavior {
        Behavior::Basis { .. } => "basis",
        Behavior::Decoupled { .. } => "decoupled",
        Behavior::Entangled => "entangled",
    };
    println!("{label}: {kind}, Schmidt rank {}", class.schmidt_rank);
    for (r, q, c) in s.terms() {
        println!("    {:+.4}{:+.4}i |{r}>|{q}>", c.re, c.im);
    }
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let perm = ghz4_perm();
    println!("permutation {perm}");
    let half = Complex64::new(0.5, 0.0);
    let uniform: Vec<(usize, Complex64)> = (0..4).map(|q| (q, half)).collect();

    show(
        "basis input, word aab",
        &run_final(&perm, &init_joint("aab", &[(1, half)], 4)?)?,
    );
    show(
        "superposition, word aab",
        &run_final(&perm, &init_joint("aab", &uniform, 4)?)?,
    );
    show(
        "superposition, word abba",
        &run_final(&perm, &init_joint("abba", &uniform, 4)?)?,
    );

    let traj = run(&perm, &init_joint("abba", &uniform, 4)?)?;
    println!(
        "support along the run: {:?}",
        traj.iter().map(|s| s.support_size()).collect::<Vec<_>>()
    );
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
