//! Average current of every extended state along a coupling sweep. The
//! largest value sits at the exceptional point.
//!
//! cargo run --example currents -- 5

use bethe_pt::chain::exceptional_point;
use bethe_pt::transport::{biorthogonal_current_n1, ep_current, sweep_maximum, uniform_current_sweep};

fn main() -> bethe_pt::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(5, |s| s.parse().unwrap());
    let grid: Vec<f64> = (0..300).map(|i| 0.01 + 0.01 * i as f64).collect();
    let rows = uniform_current_sweep(n, &grid)?;

    println!("gamma     best J_av  state");
    for chunk in rows.chunks(n + 1).step_by(25) {
        let best = chunk
            .iter()
            .max_by(|a, b| a.profile.average.total_cmp(&b.profile.average))
            .unwrap();
        println!(
            "{:<9.3} {:<10.6} {}",
            best.gamma_tilde,
            best.profile.average,
            best.phase.as_str()
        );
    }

    let (at, max) = sweep_maximum(&rows).unwrap();
    println!("\nmaximum {max:.9} at gamma = {at:.3}");
    println!("EP {:.6}, current there {:.9}", exceptional_point(n), ep_current(n));
    println!(
        "two-site chain, biorthogonal current at gamma = 0.5: {:.1e}",
        biorthogonal_current_n1(0.5)?
    );
    Ok(())
}
