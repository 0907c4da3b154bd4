//! Transmission through a gain/loss dimer between ideal leads.
//!
//! cargo run --example scattering

use bethe_pt::scattering::{scatter_sweep, transmission, ScatterConfig};

fn main() -> bethe_pt::Result<()> {
    println!("T at E = 0:");
    for g in [0.5, 1.0, 1.4, 1.414, 1.4142, 1.5, 2.0] {
        let t = transmission(&ScatterConfig {
            gamma: g,
            energy: 0.0,
            lead_length: 5,
        })?;
        println!("  gamma = {g:<7} T = {t:.6e}");
    }
    println!("\nE       T(gamma=1)  closed form");
    for r in scatter_sweep(&[1.0], -1.8, 1.8, 10, 5)? {
        println!("{:<7.3} {:<11.6} {:.6}", r.energy, r.t, r.t_closed_form);
    }
    Ok(())
}
