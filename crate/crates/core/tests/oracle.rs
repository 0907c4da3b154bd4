//! The analytical localized and extended states are the whole spectrum.

use bethe_pt::cli::verify::{verify_tree, VerifyOptions};
use bethe_pt::lattice::TreeSpec;

fn assert_complete(spec: TreeSpec) {
    let r = verify_tree(&spec, &VerifyOptions::default()).unwrap();
    assert!(r.passed(), "{:?}: {:?}", spec.branching(), r.first_failure());
    assert_eq!(r.localized + r.extended, r.n_tot);
    assert_eq!(r.matched.len(), r.n_tot);
}

#[test]
fn asymmetric_boundaries() {
    for (b, g0, gn) in [
        (vec![4, 1, 3], 0.1, 2.5),
        (vec![1, 1, 5, 2], 1.7, 0.3),
        (vec![6], 2.0, 0.05),
        (vec![2, 5, 1, 1, 3], 0.9, 0.9),
    ] {
        assert_complete(TreeSpec::new(b, g0, gn).unwrap());
    }
}

#[test]
fn hermitian_trees() {
    assert_complete(TreeSpec::hermitian(vec![3, 2, 2, 3]).unwrap());
    assert_complete(TreeSpec::hermitian(vec![1, 7]).unwrap());
}

#[test]
fn large_trees_near_the_dense_cap() {
    assert_complete(TreeSpec::uniform(10, 2, 0.6).unwrap());
    assert_complete(TreeSpec::new(vec![5, 4, 3, 2, 2, 2], 1.1, 0.4).unwrap());
}
