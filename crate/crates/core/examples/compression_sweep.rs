//! Rate and fidelity of the typical-subspace scheme over block lengths, with
//! the matrix-level channels checked where they are small enough.

use fermicode::compression::{build_scheme_capped, reliability_report, scheme_fidelity};
use fermicode::FermionicState;

fn main() -> fermicode::Result<()> {
    let rho = FermionicState::diagonal(&[0.9, 0.1])?;
    println!("N     M     rate     fidelity   dense");
    for n in [8, 10, 50, 200, 1000, 4000] {
        let s = build_scheme_capped(&rho, n, 0.1, 10)?;
        let f = scheme_fidelity(&s)?;
        let dense = f
            .dense
            .map_or_else(|| "-".to_string(), |d| format!("{d:.6}"));
        println!(
            "{n:<5} {:<5} {:.4}   {:.6}   {dense}",
            s.target_modes, s.rate, f.spectral
        );
    }

    let s = build_scheme_capped(&rho, 6, 0.3, 6)?;
    let r = reliability_report(&s, 2, 0)?;
    println!(
        "N=6 reliability: delta {:.4}, worst closeness {:.4}, bound {:.4}",
        r.delta,
        r.values.iter().cloned().fold(0.0, f64::max),
        r.bound
    );
    Ok(())
}
