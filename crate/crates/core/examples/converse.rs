//! Below the entropy even the best subspace of the allowed size captures a
//! vanishing share of the source.

use fermicode::compression::converse_scheme_fidelity;
use fermicode::fock::Parity;
use fermicode::typicality::SpectralSource;

fn main() -> fermicode::Result<()> {
    let source = SpectralSource::from_probabilities(&[0.9, 0.1], &[Parity::Even, Parity::Odd])?;
    let rate = 0.3;
    println!("rate {rate} against entropy {:.4}", source.entropy());
    for n in [2, 10, 100, 500, 1000, 2000] {
        let r = converse_scheme_fidelity(&source, n, rate)?;
        println!(
            "N={n:<5} best mass {:.3e}  fidelity <= {:.3e}",
            r.best_mass, r.fidelity
        );
    }
    Ok(())
}
