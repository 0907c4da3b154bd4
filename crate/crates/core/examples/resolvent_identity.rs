//! Projects a chain Hamiltonian onto a few sites and checks that the
//! effective Hamiltonian reproduces that block of the resolvent.
//!
//! cargo run --example resolvent_identity

use bethe_pt::chain::ChainSpec;
use bethe_pt::spectral::{effective_hamiltonian_projection, resolvent_identity_gap, ProjectionPair};
use num_complex::Complex64;

fn main() -> bethe_pt::Result<()> {
    let h = ChainSpec::scaled_uniform(6, 0.7)?.dense();
    let pair = ProjectionPair::new(7, &[0, 6])?;
    for e in [
        Complex64::new(0.3, 0.5),
        Complex64::new(-1.2, 0.1),
        Complex64::new(2.5, -0.4),
    ] {
        let heff = effective_hamiltonian_projection(&h, &pair, e)?;
        println!("E = {e:.2}");
        for i in 0..2 {
            println!("  [{:+.5}, {:+.5}]", heff[(i, 0)], heff[(i, 1)]);
        }
        println!("  resolvent gap {:.2e}", resolvent_identity_gap(&h, &pair, e)?);
    }
    Ok(())
}
