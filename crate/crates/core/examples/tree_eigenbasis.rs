//! Builds a small nonuniform tree and compares the analytical eigenvalues
//! with the dense eigensolver.
//!
//! cargo run --example tree_eigenbasis -- 3,2,4 0.2 0.7

use bethe_pt::chain::extended_states;
use bethe_pt::lattice::{assemble_hamiltonian, build_index, TreeSpec};
use bethe_pt::localized::all_localized;
use bethe_pt::spectral::{eig_dense, eigenvalues, match_spectra};
use num_complex::Complex64;

fn main() -> bethe_pt::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let branching: Vec<usize> = args
        .first()
        .map_or("3,2,4", String::as_str)
        .split(',')
        .map(|s| s.trim().parse().expect("branching must be integers"))
        .collect();
    let gamma0: f64 = args.get(1).map_or(0.2, |s| s.parse().unwrap());
    let gamma_n: f64 = args.get(2).map_or(gamma0, |s| s.parse().unwrap());

    let spec = TreeSpec::new(branching, gamma0, gamma_n)?;
    let index = build_index(&spec)?;
    let h = assemble_hamiltonian(&spec, &index)?;
    println!(
        "branching {:?}, n_tot {}, nonzeros {}",
        spec.branching(),
        index.n_tot(),
        h.nnz()
    );

    let localized = all_localized(&spec, &index)?;
    let extended = extended_states(&spec, &index)?;
    let mut analytical: Vec<Complex64> = localized.iter().map(|s| s.value()).collect();
    analytical.extend(extended.iter().map(|s| s.chain_pair.value));
    println!("{} localized + {} extended states", localized.len(), extended.len());

    let oracle = eigenvalues(&eig_dense(&h)?);
    let m = match_spectra(&oracle, &analytical)?;
    println!("largest distance to the dense spectrum: {:.2e}", m.max_distance);

    println!("\nextended states (effective chain):");
    for s in &extended {
        println!("  E = {:+.6} {:+.6}i", s.chain_pair.value.re, s.chain_pair.value.im);
    }
    Ok(())
}
