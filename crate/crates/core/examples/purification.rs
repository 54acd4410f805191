//! Purify a random mixed state, then map one purification onto another with
//! a channel acting only on the purifying modes.

use fermicode::channels::Side;
use fermicode::random;
use fermicode::selftest::rotated_purification;
use fermicode::{connect_purifications, minimal_purification};

fn main() -> fermicode::Result<()> {
    let mut rng = random::seeded(4);
    let rho = random::random_state(&mut rng, 2, 3);
    let psi = minimal_purification(&rho)?;
    println!(
        "{} system modes, {} purifying modes, parity {}",
        psi.system_modes(),
        psi.purifier_modes(),
        psi.parity()
    );
    println!(
        "marginal error: {:.3e}",
        (psi.marginal().matrix() - rho.matrix()).norm()
    );

    let phi = rotated_purification(&mut rng, &rho, 1)?;
    let v = connect_purifications(&psi, &phi)?;
    let mapped = v
        .extend(rho.modes(), Side::Before)
        .apply_matrix(psi.state().matrix())?;
    println!(
        "connecting channel {} -> {} modes, error {:.3e}",
        v.in_modes(),
        v.out_modes(),
        (mapped - phi.state().matrix()).norm()
    );
    Ok(())
}
