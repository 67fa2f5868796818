// Balanced automata are exactly the ones with a unitary realization.

use qsync::census::{decode, enumerate};
use qsync::prelude::*;
use qsync::unitarize::exists_permutation_bruteforce;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for n in 1..=3 {
        let e = enumerate(n)?;
        println!(
            "n={n}: {} automata, {} balanced, {} with a realizing bijection",
            e.total, e.balanced, e.realizable
        );
        assert_eq!(e.balanced, e.realizable);
    }

    // The first balanced three-state automaton, in both constructions.
    let dfa = (0..729)
        .map(|code| decode(3, code))
        .find(Dfa::is_balanced)
        .ok_or("none balanced")?;
    print!("{dfa}");
    for mode in [UnitarizeMode::Canonical, UnitarizeMode::Eulerian] {
        match unitarize(&dfa, mode) {
            Ok(perm) => println!(
                "{mode:?}: {perm}  realizes: {}",
                verify_realizes(&perm, &dfa)
            ),
            Err(e) => println!("{mode:?}: {e}"),
        }
    }

    let ex2 = zoo("example2", &ZooParams::default())?;
    println!("example2 in-degrees {:?}", ex2.degree_profile().in_total);
    println!(
        "example2 realizable: {}",
        exists_permutation_bruteforce(&ex2)?
    );
    if let Err(e) = unitarize(&ex2, UnitarizeMode::Canonical) {
        println!("example2: {e}");
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
