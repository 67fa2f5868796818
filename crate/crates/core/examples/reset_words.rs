// Shortest and greedy synchronizing words for the example automata.

use qsync::automaton::{example3, swap01};
use qsync::prelude::*;
use qsync::syncword::{cerny_audit, example3_reset_word, shortest_sync_word_to};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let ex1 = zoo("example1", &ZooParams::default())?;
    for target in 0..2 {
        if let Some(r) = shortest_sync_word_to(&ex1, target)? {
            println!("example1 -> {target}: {:?}", r.rendered);
        }
    }

    let ex2 = zoo("example2", &ZooParams::default())?;
    println!(
        "example2 shortest: {:?}",
        shortest_sync_word(&ex2)?.map(|r| r.rendered)
    );

    println!(
        "{:>2} {:>9} {:>9} {:>6}",
        "n", "shortest", "greedy", "bound"
    );
    for n in 3..=8 {
        let dfa = example3(n, &swap01(n))?;
        let best = shortest_sync_word(&dfa)?.ok_or("not synchronizing")?;
        let greedy = greedy_sync_word(&dfa).ok_or("greedy failed")?;
        let audit = cerny_audit(&dfa)?;
        println!(
            "{n:>2} {:>9} {:>9} {:>6}",
            best.rendered, greedy.rendered, audit.bound
        );
        assert!(is_synchronizing_word(&dfa, &example3_reset_word(n)).is_some());
    }

    let ghz4 = zoo("ghz4", &ZooParams::default())?;
    let abab = ghz4.parse_word("abab")?;
    println!(
        "ghz4: abab synchronizes: {}",
        is_synchronizing_word(&ghz4, &abab).is_some()
    );
    println!(
        "ghz4 shortest: {:?}",
        shortest_sync_word(&ghz4)?.map(|r| r.rendered)
    );
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
