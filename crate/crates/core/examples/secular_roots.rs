//! Roots of the uniform effective chain across the exceptional point, and
//! the broken-phase decay rate at large coupling.
//!
//! cargo run --example secular_roots -- 4

use bethe_pt::chain::{broken_log_offset, exceptional_point, solve_secular, solve_secular_broken};

fn main() -> bethe_pt::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(4, |s| s.parse().unwrap());
    let ep = exceptional_point(n);
    println!("N = {n}, exceptional point at gamma = {ep:.9}");

    for g in [0.5 * ep, 0.9 * ep, ep, 1.1 * ep, 2.0 * ep] {
        println!("\ngamma = {g:.6}");
        for r in solve_secular(n, g)? {
            println!(
                "  {:<16} k = {:.6}{:+.6}i  E = {:+.6}{:+.6}i",
                r.phase.as_str(),
                r.k.re,
                r.k.im,
                r.energy.re,
                r.energy.im
            );
        }
    }

    println!("\nbroken pair decay rate kappa against ln gamma:");
    for g in [2.0, 5.0, 20.0, 50.0] {
        let kappa = solve_secular_broken(n, g)?[0].kappa;
        println!(
            "  gamma = {g:>4}: kappa = {kappa:.12}, kappa - ln gamma = {:.3e}",
            broken_log_offset(n, kappa)
        );
    }
    Ok(())
}
