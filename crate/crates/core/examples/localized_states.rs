//! Lists the localized families of a tree: which generation they hang
//! from, how many states each holds and where their eigenvalues sit.
//!
//! cargo run --example localized_states

use std::collections::BTreeMap;

use bethe_pt::lattice::{build_index, TreeSpec};
use bethe_pt::localized::{all_localized, family_size, localized_count};

fn main() -> bethe_pt::Result<()> {
    let spec = TreeSpec::new(vec![2, 3, 3], 0.5, 0.8)?;
    let index = build_index(&spec)?;
    let states = all_localized(&spec, &index)?;
    println!(
        "n_tot = {}, localized = {} (formula {})",
        index.n_tot(),
        states.len(),
        localized_count(&spec)
    );

    let mut families: BTreeMap<usize, Vec<_>> = BTreeMap::new();
    for s in &states {
        families.entry(s.mode.generation).or_default().push(s);
    }
    for (generation, members) in &families {
        println!(
            "\nfamily {generation}: {} states (expected {}), support {} sites",
            members.len(),
            family_size(&spec, *generation),
            members[0].support_size()
        );
        let mut values: Vec<_> = members.iter().map(|s| s.value()).collect();
        values.sort_by(|a, b| a.re.total_cmp(&b.re));
        values.dedup_by(|a, b| (*a - *b).norm() < 1e-9);
        for v in values {
            println!("  E = {:+.6} {:+.6}i", v.re, v.im);
        }
    }
    Ok(())
}
