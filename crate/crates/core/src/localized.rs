//! Localized eigenstates: roots-of-unity interference at a root site,
//! dressed by the eigenvectors of the dangling-branch sub-Hamiltonian.
//!
//! The family rooted at generation `ℓ − 1` has `(N + 1 − ℓ)(n_tot_ℓ −
//! n_tot_{ℓ−1})` members, and all families together with the `N + 1`
//! extended states exhaust the `n_tot` sites.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{TreeIndex, TreeSpec};
use crate::sparse::SparseComplexMatrix;
use crate::spectral::{eig_dense, EigenPair};

/// Interference mode `m` among the `n_ℓ` children of one root site at
/// generation `ℓ − 1`. Child `ν` (1-based) carries `e^{i m (ν−1) θ_ℓ}` with
/// `θ_ℓ = 2π/n_ℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RootsOfUnityMode {
    pub generation: usize,
    pub root_site: usize,
    pub mode: usize,
}

impl RootsOfUnityMode {
    /// Child amplitudes for branching `n`.
    pub fn phases(&self, n: usize) -> Vec<Complex64> {
        roots_of_unity_phases(self.mode, n)
    }
}

pub fn roots_of_unity_phases(mode: usize, n: usize) -> Vec<Complex64> {
    let theta = 2.0 * PI / n as f64;
    (0..n)
        .map(|nu| {
            // Reduce the angle modulo n first to keep the phases exact.
            let k = (mode * nu) % n;
            Complex64::from_polar(1.0, theta * k as f64)
        })
        .collect()
}

/// Tridiagonal matrix governing one dangling branch whose top layer is
/// generation `ℓ`; depth `j` is generation `ℓ + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchSubHamiltonian {
    pub root_generation: usize,
    /// Hopping magnitudes `√n_{ℓ+1}, …, √n_N`.
    pub hoppings: Vec<f64>,
    pub gamma_n: f64,
}

impl BranchSubHamiltonian {
    pub fn size(&self) -> usize {
        self.hoppings.len() + 1
    }

    pub fn matrix(&self) -> SparseComplexMatrix {
        let d = self.size();
        let mut t = Vec::with_capacity(3 * d);
        for (j, &h) in self.hoppings.iter().enumerate() {
            t.push((j, j + 1, Complex64::new(-h, 0.0)));
            t.push((j + 1, j, Complex64::new(-h, 0.0)));
        }
        t.push((d - 1, d - 1, Complex64::new(0.0, self.gamma_n)));
        SparseComplexMatrix::from_triplets(d, t).expect("indices lie inside the matrix")
    }

    pub fn eigenpairs(&self) -> Result<Vec<EigenPair>> {
        eig_dense(&self.matrix())
    }
}

pub fn branch_sub_hamiltonian(spec: &TreeSpec, root_generation: usize) -> Result<BranchSubHamiltonian> {
    let n = spec.generations();
    if root_generation == 0 || root_generation > n {
        return Err(Error::OutOfRange(format!(
            "branch generation {root_generation} outside 1..={n}"
        )));
    }
    Ok(BranchSubHamiltonian {
        root_generation,
        hoppings: (root_generation + 1..=n)
            .map(|g| (spec.branching_at(g) as f64).sqrt())
            .collect(),
        gamma_n: spec.gamma_n(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizedState {
    pub mode: RootsOfUnityMode,
    pub sub_pair: EigenPair,
    /// Unit-norm amplitudes over all tree sites.
    pub full_vector: Vec<Complex64>,
}

impl LocalizedState {
    pub fn value(&self) -> Complex64 {
        self.sub_pair.value
    }

    pub fn support_size(&self) -> usize {
        self.full_vector.iter().filter(|x| **x != Complex64::default()).count()
    }
}

/// Number of states in family `ℓ`, exact.
pub fn family_size(spec: &TreeSpec, generation: usize) -> u128 {
    let sizes = spec.generation_sizes();
    let depth = (spec.generations() + 1 - generation) as u128;
    depth * (sizes[generation] - sizes[generation - 1])
}

/// `Σ_ℓ (N + 1 − ℓ)(n_tot_ℓ − n_tot_{ℓ−1})`.
pub fn localized_count(spec: &TreeSpec) -> u128 {
    (1..=spec.generations()).map(|g| family_size(spec, g)).sum()
}

/// Whether localized and extended states together number exactly `n_tot`.
pub fn counting_identity_holds(spec: &TreeSpec) -> bool {
    localized_count(spec) == spec.n_tot() - (spec.generations() as u128 + 1)
}

/// The family with roots at generation `ℓ − 1`.
pub fn localized_family(spec: &TreeSpec, index: &TreeIndex, generation: usize) -> Result<Vec<LocalizedState>> {
    let sub = branch_sub_hamiltonian(spec, generation)?;
    if index.generations() != spec.generations() || index.n_tot() as u128 != spec.n_tot() {
        return Err(Error::DimensionMismatch {
            expected: spec.n_tot() as usize,
            got: index.n_tot(),
        });
    }
    let n_l = spec.branching_at(generation);
    if n_l < 2 {
        return Ok(Vec::new());
    }
    let sub_pairs = sub.eigenpairs()?;
    let n = spec.generations();
    // Sites per depth inside a single child branch.
    let mut per_depth = Vec::with_capacity(n - generation + 1);
    let mut count = 1usize;
    per_depth.push(count);
    for g in generation + 1..=n {
        count *= spec.branching_at(g);
        per_depth.push(count);
    }
    let norm_children = (n_l as f64).sqrt();

    let roots: Vec<usize> = index.generation_range(generation - 1).collect();
    let states = roots
        .par_iter()
        .flat_map_iter(|&root| {
            let children = index.children(root);
            let sub_pairs = &sub_pairs;
            let per_depth = &per_depth;
            (1..n_l).flat_map(move |m| {
                let mode = RootsOfUnityMode {
                    generation,
                    root_site: root,
                    mode: m,
                };
                let phases = mode.phases(n_l);
                let children = children.clone();
                sub_pairs.iter().map(move |pair| {
                    let mut v = vec![Complex64::default(); index.n_tot()];
                    for (nu, child) in children.clone().enumerate() {
                        for (j, &c) in per_depth.iter().enumerate() {
                            let amp = phases[nu] * pair.vector[j] / ((c as f64).sqrt() * norm_children);
                            for site in index.descendants_at(child, generation + j) {
                                v[site] = amp;
                            }
                        }
                    }
                    LocalizedState {
                        mode,
                        sub_pair: pair.clone(),
                        full_vector: v,
                    }
                })
            })
        })
        .collect();
    Ok(states)
}

/// States localized on the peripheral generation, all with eigenvalue
/// exactly `+iγ_N`.
pub fn peripheral_family(spec: &TreeSpec, index: &TreeIndex) -> Result<Vec<LocalizedState>> {
    localized_family(spec, index, spec.generations())
}

/// Every localized family, ordered by generation.
pub fn all_localized(spec: &TreeSpec, index: &TreeIndex) -> Result<Vec<LocalizedState>> {
    let mut out = Vec::new();
    for g in 1..=spec.generations() {
        out.extend(localized_family(spec, index, g)?);
    }
    Ok(out)
}

/// Inventory CSV: `family_generation,root_site_id,mode,re_E,im_E,support_size`.
pub fn write_inventory_csv<W: Write>(states: &[LocalizedState], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "family_generation",
        "root_site_id",
        "mode",
        "re_E",
        "im_E",
        "support_size",
    ])?;
    for s in states {
        out.write_record([
            s.mode.generation.to_string(),
            s.mode.root_site.to_string(),
            s.mode.mode.to_string(),
            format!("{:.15e}", s.value().re),
            format!("{:.15e}", s.value().im),
            s.support_size().to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{assemble_hamiltonian, build_index};
    use crate::spectral::{check_im_nonneg, residual};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn phases_sum_to_zero() {
        for n in 2..9 {
            for m in 1..n {
                let s: Complex64 = roots_of_unity_phases(m, n).iter().sum();
                assert!(s.norm() < 1e-14, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn modes_with_uniform_vector_span_child_space() {
        // The discrete Fourier matrix is unitary up to 1/n, so its Gram
        // matrix is n times the identity.
        for n in 2..7 {
            let mut rows = vec![vec![c(1.0, 0.0); n]];
            rows.extend((1..n).map(|m| roots_of_unity_phases(m, n)));
            for a in 0..n {
                for b in 0..n {
                    let g: Complex64 = rows[a].iter().zip(&rows[b]).map(|(x, y)| x.conj() * y).sum();
                    let want = if a == b { n as f64 } else { 0.0 };
                    assert!((g - c(want, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn peripheral_pair_is_antisymmetric() {
        let spec = TreeSpec::new(vec![2], 0.4, 0.7).unwrap();
        let index = build_index(&spec).unwrap();
        let fam = peripheral_family(&spec, &index).unwrap();
        assert_eq!(fam.len(), 1);
        let v = &fam[0].full_vector;
        let s = 0.5f64.sqrt();
        assert_eq!(v[0], c(0.0, 0.0));
        assert!((v[1] - c(s, 0.0)).norm() < 1e-15);
        assert!((v[2] + c(s, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn peripheral_value_is_exact() {
        let spec = TreeSpec::new(vec![3], 0.2, 0.7).unwrap();
        let index = build_index(&spec).unwrap();
        let fam = peripheral_family(&spec, &index).unwrap();
        assert_eq!(fam.len(), 2);
        for s in &fam {
            assert_eq!(s.value(), c(0.0, 0.7));
        }
        let spec = TreeSpec::new(vec![2, 3], 0.3, 0.3).unwrap();
        let index = build_index(&spec).unwrap();
        assert_eq!(peripheral_family(&spec, &index).unwrap().len(), 4);
    }

    #[test]
    fn sub_hamiltonian_shapes() {
        let spec = TreeSpec::new(vec![3, 5, 5], 1.0, 2.0).unwrap();
        let top = branch_sub_hamiltonian(&spec, 3).unwrap();
        assert_eq!(top.size(), 1);
        assert_eq!(top.matrix().get(0, 0), c(0.0, 2.0));
        let h = branch_sub_hamiltonian(&spec, 1).unwrap();
        assert_eq!(h.size(), 3);
        assert_eq!(h.hoppings, vec![5f64.sqrt(), 5f64.sqrt()]);
        assert!(branch_sub_hamiltonian(&spec, 0).is_err());
        assert!(branch_sub_hamiltonian(&spec, 4).is_err());
    }

    #[test]
    fn hermitian_two_layer_branch() {
        let spec = TreeSpec::hermitian(vec![2, 4]).unwrap();
        let vals: Vec<Complex64> = branch_sub_hamiltonian(&spec, 1)
            .unwrap()
            .eigenpairs()
            .unwrap()
            .iter()
            .map(|p| p.value)
            .collect();
        assert!((vals[0] - c(-2.0, 0.0)).norm() < 1e-12);
        assert!((vals[1] - c(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn two_layer_branch_with_gain() {
        // E² − iγE − n = 0 with n = 4, γ = 1: E = i/2 ± √(15)/2.
        let spec = TreeSpec::new(vec![2, 4], 0.5, 1.0).unwrap();
        let pairs = branch_sub_hamiltonian(&spec, 1).unwrap().eigenpairs().unwrap();
        let r = 15f64.sqrt() / 2.0;
        assert!((pairs[0].value - c(-r, 0.5)).norm() < 1e-12);
        assert!((pairs[1].value - c(r, 0.5)).norm() < 1e-12);
        assert!(check_im_nonneg(&[pairs[0].value, pairs[1].value], 1e-12).passed());
    }

    #[test]
    fn family_counts() {
        let spec = TreeSpec::uniform(2, 2, 0.3).unwrap();
        assert_eq!(family_size(&spec, 1), 2);
        assert_eq!(family_size(&spec, 2), 2);
        assert_eq!(localized_count(&spec), 4);
        assert!(counting_identity_holds(&spec));
        let spec = TreeSpec::new(vec![1, 3, 1, 2], 0.3, 0.3).unwrap();
        assert_eq!(family_size(&spec, 1), 0);
        assert!(counting_identity_holds(&spec));
        let index = build_index(&spec).unwrap();
        assert!(localized_family(&spec, &index, 1).unwrap().is_empty());
        assert_eq!(
            all_localized(&spec, &index).unwrap().len() as u128,
            localized_count(&spec)
        );
    }

    #[test]
    fn states_are_exact_eigenvectors_with_null_ancestors() {
        let spec = TreeSpec::new(vec![3, 2, 4], 0.2, 0.7).unwrap();
        let index = build_index(&spec).unwrap();
        let h = assemble_hamiltonian(&spec, &index).unwrap();
        let states = all_localized(&spec, &index).unwrap();
        assert_eq!(states.len() as u128, localized_count(&spec));
        for s in &states {
            let norm: f64 = s.full_vector.iter().map(|x| x.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            assert!(residual(&h, s.value(), &s.full_vector) < 1e-10);
            let first_live = index.generation_offsets()[s.mode.generation];
            assert!(s.full_vector[..first_live].iter().all(|x| *x == Complex64::default()));
            assert!(s.value().im >= -1e-12);
        }
    }

    #[test]
    fn inventory_csv_rows() {
        let spec = TreeSpec::uniform(2, 2, 0.3).unwrap();
        let index = build_index(&spec).unwrap();
        let states = all_localized(&spec, &index).unwrap();
        let mut buf = Vec::new();
        write_inventory_csv(&states, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + states.len());
    }
}
