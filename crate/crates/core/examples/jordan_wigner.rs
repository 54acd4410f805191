//! Field operators on three modes, their anticommutators, and what a
//! mode reordering does to them.

use fermicode::fock::{self, ModeOrdering};

fn main() -> fermicode::Result<()> {
    let modes = 3;
    let report = fock::validate_car(modes)?;
    println!(
        "CAR deviation on {modes} modes: {:.3e}",
        report.max_deviation
    );

    let canonical = ModeOrdering::canonical(modes);
    let swapped = ModeOrdering::from_sequence(&[2, 0, 1])?;
    for mode in 0..modes {
        let a = fock::jw_field(mode, &canonical)?;
        let moved = fock::reorder_modes(&a, &canonical, &swapped)?;
        let direct = fock::jw_field(mode, &swapped)?;
        println!(
            "mode {mode}: reordered field differs from direct construction by {:.1e}",
            (moved - direct).norm()
        );
    }
    Ok(())
}
