//! The parity channel leaves every single-mode state alone, yet acting on
//! half of a two-mode state it is far from the identity.

use fermicode::channels::parity_counterexample;

fn main() -> fermicode::Result<()> {
    let r = parity_counterexample(101)?;
    println!("states checked locally: {}", r.grid_points);
    println!("largest local change: {:.3e}", r.local_residual);
    println!("extended trace norm: {:.6}", r.extended_trace_norm);
    println!("extended trace distance: {:.6}", r.extended_trace_distance);
    println!("entanglement fidelity: {:.6}", r.entanglement_fidelity);
    Ok(())
}
