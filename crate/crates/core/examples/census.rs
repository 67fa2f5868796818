// How rare unitarizable automata are.

use qsync::census::{f_qdfa, f_stirling, sample_fraction, CensusReport};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    println!(
        "{:>3} {:>14} {:>14} {:>12}",
        "n", "exact", "stirling", "ratio"
    );
    for n in [1, 2, 3, 5, 10, 20, 40] {
        let f = f_qdfa(n);
        println!(
            "{n:>3} {:>14.6e} {:>14.6e} {:>12.6}",
            f.value,
            f_stirling(n),
            f_stirling(n) / f.value
        );
    }
    let r = f_qdfa(31).value / f_qdfa(30).value;
    println!(
        "f(31)/f(30) = {r:.5}, 2/e^2 = {:.5}",
        2.0 / std::f64::consts::E.powi(2)
    );

    let est = sample_fraction(3, 200_000, 42)?;
    println!(
        "n=3 sampled {}/{} = {:.5} (exact {:.5})",
        est.hits,
        est.samples,
        est.fraction,
        f_qdfa(3).value
    );

    let report = CensusReport::new(4)?.with_enumeration()?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
