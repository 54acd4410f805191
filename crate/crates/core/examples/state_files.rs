//! Write a state and a channel to JSON, read them back, and show how a
//! file with cross-parity coherence is refused.

use fermicode::io;
use fermicode::random;

fn main() -> fermicode::Result<()> {
    let dir = std::env::temp_dir().join("fermicode-example");
    std::fs::create_dir_all(&dir)?;
    let mut rng = random::seeded(8);
    let rho = random::random_full_rank_state(&mut rng, 2);
    let c = random::random_channel(&mut rng, 2, 2)?;

    let state_path = dir.join("rho.json");
    io::save_state(&state_path, &rho)?;
    let loaded = io::load_state(&state_path)?;
    println!(
        "state: parity residual {:.1e}, min eigenvalue {:.4}",
        loaded.diagnostics.parity_residual, loaded.diagnostics.min_eigenvalue
    );

    let channel_path = dir.join("channel.json");
    io::save_channel(&channel_path, &c)?;
    let back = io::load_channel(&channel_path)?;
    println!("channel: {} Kraus operators", back.kraus().len());

    let bad = r#"{"modes":1,"matrix":{"dim":2,"data":[[0.5,0],[0.5,0],[0.5,0],[0.5,0]]}}"#;
    match io::parse_state(bad) {
        Err(e) => println!("refused: {} ({e})", e.kind()),
        Ok(_) => println!("unexpectedly accepted"),
    }
    Ok(())
}
