//! Entanglement fidelity of a random channel through the Kraus formula and
//! through an explicit purification, plus its closeness to the identity on
//! sampled refinements of the input.

use fermicode::channels::{
    closeness_upon_input, entanglement_fidelity, entanglement_fidelity_via_purification,
    sample_refinements, FermionicChannel,
};
use fermicode::random;

fn main() -> fermicode::Result<()> {
    let mut rng = random::seeded(21);
    let rho = random::random_full_rank_state(&mut rng, 2);
    let c = random::random_channel(&mut rng, 2, 3)?;
    let kraus = entanglement_fidelity(&rho, &c)?;
    let purified = entanglement_fidelity_via_purification(&rho, &c)?;
    println!("Kraus route:        {kraus:.12}");
    println!("purification route: {purified:.12}");

    let family = sample_refinements(&rho, 4, 1)?;
    let report = closeness_upon_input(&c, &FermionicChannel::identity(2), &family)?;
    println!(
        "closeness {:.6} over {} refinements, bound {:.6}",
        report.value,
        family.members.len(),
        2.0 * (1.0 - kraus).max(0.0).sqrt()
    );
    Ok(())
}
