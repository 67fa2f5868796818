// The 3x3 grid robot: one word gathers every start in the centre cell.

use qsync::automaton::{robot, robot_cell_blocks, robot_coords};
use qsync::syncword::synchronizes_to_class;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dfa = robot();
    let word = dfa.parse_word("aabaababa")?;
    let facing = ['N', 'E', 'S', 'W'];
    for q in (0..dfa.n()).step_by(5) {
        let (x, y, f) = robot_coords(q);
        let (x2, y2, f2) = robot_coords(dfa.apply_word(&word, q));
        println!("({x},{y},{}) -> ({x2},{y2},{})", facing[f], facing[f2]);
    }
    let cell = synchronizes_to_class(&dfa, &word, &robot_cell_blocks()).ok_or("no common cell")?;
    println!("every start ends in cell ({},{})", cell % 3, cell / 3);
    println!("balanced: {}", dfa.is_balanced());
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
