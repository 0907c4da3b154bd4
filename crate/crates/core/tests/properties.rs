use bethe_pt::chain::{exceptional_point, solve_secular, ChainSpec};
use bethe_pt::lattice::{assemble_hamiltonian, build_index, TreeSpec};
use bethe_pt::localized::{all_localized, counting_identity_holds, localized_count};
use bethe_pt::random::{analyze_sample, sample_chain, RandomChainSpec, Sampling};
use bethe_pt::scattering::{transmission, transmission_closed_form, ScatterConfig};
use bethe_pt::sparse::SparseComplexMatrix;
use bethe_pt::spectral::{
    check_im_nonneg, check_spectrum_symmetry, eig_dense, eigenvalues, match_spectra, min_cost_assignment,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn tree(max_n: usize, max_b: usize, max_sites: u128) -> impl Strategy<Value = TreeSpec> {
    (prop::collection::vec(1..=max_b, 1..=max_n), 0.05..3.0f64, 0.05..3.0f64)
        .prop_map(|(b, g0, gn)| TreeSpec::new(b, g0, gn).unwrap())
        .prop_filter("size", move |s| s.n_tot() <= max_sites)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counting_identity_exact(b in prop::collection::vec(1usize..=7, 1..=10)) {
        let spec = TreeSpec::new(b, 1.0, 1.0).unwrap();
        prop_assert!(counting_identity_holds(&spec));
        prop_assert_eq!(localized_count(&spec) + spec.generations() as u128 + 1, spec.n_tot());
    }

    #[test]
    fn hamiltonian_structure(spec in tree(6, 4, 3000)) {
        let index = build_index(&spec).unwrap();
        let h = assemble_hamiltonian(&spec, &index).unwrap();
        let n_tot = index.n_tot();
        prop_assert!(h.is_transpose_symmetric(0.0));
        prop_assert_eq!(h.off_diagonal_nnz(), 2 * (n_tot - 1));
        let periphery = index.generation_range(spec.generations()).len() as f64;
        let expected = Complex64::new(0.0, spec.gamma_n() * periphery - spec.gamma0());
        prop_assert!((h.trace() - expected).norm() <= 1e-12 * periphery.max(1.0));
    }

    #[test]
    fn index_paths_round_trip(spec in tree(5, 4, 2000)) {
        let index = build_index(&spec).unwrap();
        for id in 0..index.n_tot() {
            let path = index.path_of(id).unwrap();
            prop_assert_eq!(path.generation(), index.generation_of(id));
            prop_assert_eq!(index.id_of(&path).unwrap(), id);
            if let Some(p) = index.parent(id) {
                prop_assert!(index.children(p).contains(&id));
            }
        }
    }

    #[test]
    fn spectrum_mirrors_and_localized_decay(spec in tree(4, 3, 200)) {
        let index = build_index(&spec).unwrap();
        let h = assemble_hamiltonian(&spec, &index).unwrap();
        let oracle = eigenvalues(&eig_dense(&h).unwrap());
        let sym = check_spectrum_symmetry(&oracle, 1e-8);
        prop_assert!(sym.passed(), "mismatch {}", sym.max_mismatch);
        let loc: Vec<Complex64> = all_localized(&spec, &index).unwrap().iter().map(|s| s.value()).collect();
        prop_assert!(check_im_nonneg(&loc, 1e-12).passed());
    }

    #[test]
    fn secular_roots_match_oracle(n in 1usize..=10, g in 0.02..3.0f64) {
        prop_assume!((g - exceptional_point(n)).abs() > 1e-3);
        let roots: Vec<Complex64> = solve_secular(n, g).unwrap().iter().map(|r| r.energy).collect();
        let oracle = eigenvalues(&ChainSpec::scaled_uniform(n, g).unwrap().eigenpairs().unwrap());
        prop_assert!(match_spectra(&oracle, &roots).unwrap().max_distance <= 1e-8);
    }

    #[test]
    fn assignment_is_optimal(costs in prop::collection::vec(prop::collection::vec(0.0..10.0f64, 6), 1..=6)) {
        let n = costs.len();
        let cost: Vec<Vec<f64>> = costs.iter().map(|r| r[..n].to_vec()).collect();
        let total = |a: &[usize]| a.iter().enumerate().map(|(i, &j)| cost[i][j]).sum::<f64>();
        let found = min_cost_assignment(&cost);
        let mut seen = found.clone();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
        let best = permutations(n).iter().map(|p| total(p)).fold(f64::INFINITY, f64::min);
        prop_assert!(total(&found) <= best + 1e-9);
    }

    #[test]
    fn transmission_matches_closed_form(e in -1.99..1.99f64, g in 0.0..3.0f64, lead in 0usize..20) {
        let t = transmission(&ScatterConfig { gamma: g, energy: e, lead_length: lead }).unwrap();
        let c = transmission_closed_form(e, g).unwrap();
        prop_assert!((t - c).abs() <= 1e-10 * c.max(1.0));
    }

    #[test]
    fn coordinate_files_round_trip(spec in tree(4, 3, 300)) {
        let h = assemble_hamiltonian(&spec, &build_index(&spec).unwrap()).unwrap();
        let mut buf = Vec::new();
        h.write_coordinate(&mut buf).unwrap();
        let back = SparseComplexMatrix::read_coordinate(buf.as_slice()).unwrap();
        prop_assert_eq!(back.content_hash(), h.content_hash());
        prop_assert_eq!(back.max_abs_diff(&h), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn samples_are_deterministic(seed in any::<u64>(), id in 0u64..1000, delta in 0.0..0.3f64) {
        let spec = RandomChainSpec::new(2.0, delta, 5, seed).unwrap();
        prop_assert_eq!(sample_chain(&spec, id).unwrap(), sample_chain(&spec, id).unwrap());
        prop_assert_eq!(analyze_sample(&spec, id).unwrap(), analyze_sample(&spec, id).unwrap());
        let anti = spec.clone().with_sampling(Sampling::Antithetic);
        let (a, b) = (sample_chain(&anti, 2 * id).unwrap(), sample_chain(&anti, 2 * id + 1).unwrap());
        for (x, y) in a.hoppings().iter().zip(b.hoppings()) {
            prop_assert!((x * x + y * y - 2.0).abs() <= 1e-12);
        }
    }
}
