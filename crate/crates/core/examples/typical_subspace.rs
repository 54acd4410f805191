//! Typical-subspace mass and dimension for a one-mode source as the block
//! length grows.

use fermicode::fock::Parity;
use fermicode::typicality::{dimension_bounds, SpectralSource, TypicalSpec};

fn main() -> fermicode::Result<()> {
    let source = SpectralSource::from_probabilities(&[0.9, 0.1], &[Parity::Even, Parity::Odd])?;
    println!("entropy {:.6} bits", source.entropy());
    println!("N      mass       log2 dim   lower      upper");
    for n in [100, 500, 1000, 5000, 20000] {
        let spec = TypicalSpec::new(&source, n, 0.05)?;
        let b = dimension_bounds(&source, &spec)?;
        println!(
            "{n:<6} {:.6}   {:<10.3} {:<10.3} {:.3}",
            b.mass, b.log2_dim, b.log2_lower, b.log2_upper
        );
    }
    Ok(())
}
