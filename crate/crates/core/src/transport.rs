//! Currents carried by extended eigenstates.
//!
//! The link current between generations `ℓ` and `ℓ+1` is
//! `J(ℓ) = −2 Im[ψ(ℓ+1) ψ(ℓ)*]`, positive when the flow runs toward the
//! origin. Expectations use right eigenvectors with the Hermitian-conjugate
//! bra; the biorthogonal form appears only in [`biorthogonal_current_n1`].

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::chain::{eigenfunction, exceptional_point, solve_secular, ChainSpec, Phase, EP_WINDOW};
use crate::error::{Error, Result};
use crate::lattice::{link_current_value, TreeIndex, TreeSpec};
use crate::sparse::SparseComplexMatrix;
use crate::spectral::EigenPair;

/// How link currents of a nonuniform chain are weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum CurrentConvention {
    /// `i(|ℓ⟩⟨ℓ+1| − |ℓ+1⟩⟨ℓ|)` on every link.
    #[default]
    Unweighted,
    /// Each link multiplied by its hopping magnitude `t_{ℓ+1}`.
    HoppingWeighted,
}

/// Chain current operator for link `ℓ → ℓ+1`: `+i` at `(ℓ, ℓ+1)` and `−i`
/// at `(ℓ+1, ℓ)`.
pub fn chain_current_operator(link: usize, generations: usize) -> Result<SparseComplexMatrix> {
    if link >= generations {
        return Err(Error::OutOfRange(format!(
            "link {link} in a chain with N = {generations}"
        )));
    }
    SparseComplexMatrix::from_triplets(
        generations + 1,
        [
            (link, link + 1, Complex64::new(0.0, 1.0)),
            (link + 1, link, Complex64::new(0.0, -1.0)),
        ],
    )
}

/// `−2 Im[ψ(ℓ+1) ψ(ℓ)*]`.
pub fn expectation_current(psi: &[Complex64], link: usize) -> f64 {
    -2.0 * (psi[link + 1] * psi[link].conj()).im
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurrentProfile {
    pub state_id: usize,
    /// `J(ℓ)` for `ℓ = 0..N−1`.
    pub values: Vec<f64>,
    pub average: f64,
}

impl CurrentProfile {
    pub fn new(state_id: usize, psi: &[Complex64]) -> Self {
        Self::with_weights(state_id, psi, None)
    }

    fn with_weights(state_id: usize, psi: &[Complex64], weights: Option<&[f64]>) -> Self {
        let values: Vec<f64> = (0..psi.len() - 1)
            .map(|l| expectation_current(psi, l) * weights.map_or(1.0, |w| w[l]))
            .collect();
        let average = values.iter().sum::<f64>() / values.len() as f64;
        Self {
            state_id,
            values,
            average,
        }
    }

    /// `max_ℓ J − min_ℓ J`.
    pub fn spread(&self) -> f64 {
        let max = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }
}

/// `(1/N) Σ_ℓ J(ℓ)` for a unit-norm chain state.
pub fn average_current(psi: &[Complex64]) -> f64 {
    CurrentProfile::new(0, psi).average
}

/// `4γ̃ sin²k / (N(1+γ̃²)+2)` for real `k`.
pub fn closed_form_current(generations: usize, gamma_tilde: f64, k: f64) -> f64 {
    4.0 * gamma_tilde * k.sin().powi(2) / (generations as f64 * (1.0 + gamma_tilde * gamma_tilde) + 2.0)
}

/// Average current of the coalesced state at the exceptional point:
/// `2/(N+1)` (odd `N`), `2/√(N(N+2))` (even `N`).
pub fn ep_current(generations: usize) -> f64 {
    let n = generations as f64;
    if generations % 2 == 1 {
        2.0 / (n + 1.0)
    } else {
        2.0 / (n * (n + 2.0)).sqrt()
    }
}

/// Tree current from generation `ℓ+1` into generation `ℓ`: the summed link
/// currents divided by `√n_{ℓ+1}`.
pub fn tree_current_expectation(
    full_state: &[Complex64],
    spec: &TreeSpec,
    index: &TreeIndex,
    generation: usize,
) -> Result<f64> {
    if generation >= spec.generations() {
        return Err(Error::OutOfRange(format!(
            "generation {generation} has no outgoing links (N = {})",
            spec.generations()
        )));
    }
    if full_state.len() != index.n_tot() {
        return Err(Error::DimensionMismatch {
            expected: index.n_tot(),
            got: full_state.len(),
        });
    }
    let mut total = 0.0;
    for parent in index.generation_range(generation) {
        for child in index.children(parent) {
            total += link_current_value(full_state, parent, child);
        }
    }
    Ok(total / (spec.branching_at(generation + 1) as f64).sqrt())
}

/// `|φᵀ J̃₁ ψ| / |φᵀ ψ|` maximized over both eigenstates of the two-site
/// chain, with left eigenvectors `φ = ψ` (transpose, no conjugation).
pub fn biorthogonal_current_n1(gamma_tilde: f64) -> Result<f64> {
    if (gamma_tilde - 1.0).abs() < EP_WINDOW {
        return Err(Error::AtExceptionalPoint);
    }
    let j = chain_current_operator(0, 1)?;
    let pairs = ChainSpec::scaled_uniform(1, gamma_tilde)?.eigenpairs()?;
    let mut worst: f64 = 0.0;
    for p in &pairs {
        let norm: Complex64 = p.vector.iter().map(|x| x * x).sum();
        worst = worst.max((j.bilinear(&p.vector, &p.vector) / norm).norm());
    }
    Ok(worst)
}

/// Right-vector expectation for comparison with [`biorthogonal_current_n1`].
pub fn right_current_n1(gamma_tilde: f64) -> Result<Vec<f64>> {
    let pairs = ChainSpec::scaled_uniform(1, gamma_tilde)?.eigenpairs()?;
    Ok(pairs.iter().map(|p| expectation_current(&p.vector, 0)).collect())
}

/// Eigenpairs of an arbitrary chain with their current profiles.
pub fn chain_state_currents(
    chain: &ChainSpec,
    convention: CurrentConvention,
) -> Result<Vec<(EigenPair, CurrentProfile)>> {
    let weights = match convention {
        CurrentConvention::Unweighted => None,
        CurrentConvention::HoppingWeighted => Some(chain.hoppings()),
    };
    Ok(chain
        .eigenpairs()?
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let prof = CurrentProfile::with_weights(i, &p.vector, weights);
            (p, prof)
        })
        .collect())
}

/// One state at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub gamma_tilde: f64,
    pub state_id: usize,
    pub phase: Phase,
    pub profile: CurrentProfile,
}

/// Currents of every extended state of the uniform scaled chain along
/// `grid`, from the secular roots and closed-form eigenfunctions.
pub fn uniform_current_sweep(generations: usize, grid: &[f64]) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &g in grid {
        for (i, root) in solve_secular(generations, g)?.iter().enumerate() {
            let f = eigenfunction(root, generations, g)?;
            rows.push(SweepRow {
                gamma_tilde: g,
                state_id: i,
                phase: root.phase,
                profile: CurrentProfile::new(i, &f.values),
            });
        }
    }
    Ok(rows)
}

/// Largest average current over a sweep with the `γ̃` where it occurs.
pub fn sweep_maximum(rows: &[SweepRow]) -> Option<(f64, f64)> {
    rows.iter()
        .map(|r| (r.gamma_tilde, r.profile.average))
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.total_cmp(&a.0)))
}

/// `gamma_tilde,state_id,phase,J_av`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["gamma_tilde", "state_id", "phase", "J_av"])?;
    for r in rows {
        out.write_record([
            format!("{:.12e}", r.gamma_tilde),
            r.state_id.to_string(),
            r.phase.as_str().to_string(),
            format!("{:.15e}", r.profile.average),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `gamma_tilde,state_id,phase,ell,J`.
pub fn write_profiles_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["gamma_tilde", "state_id", "phase", "ell", "J"])?;
    for r in rows {
        for (l, j) in r.profile.values.iter().enumerate() {
            out.write_record([
                format!("{:.12e}", r.gamma_tilde),
                r.state_id.to_string(),
                r.phase.as_str().to_string(),
                l.to_string(),
                format!("{j:.15e}"),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Whether `γ̃` lies inside the exceptional window of `N`.
pub fn at_exceptional_point(generations: usize, gamma_tilde: f64) -> bool {
    (gamma_tilde - exceptional_point(generations)).abs() < EP_WINDOW
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{extended_states, solve_secular_broken};
    use crate::lattice::build_index;
    use crate::localized::all_localized;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn n1_operator() {
        let j = chain_current_operator(0, 1).unwrap();
        assert_eq!(j.get(0, 1), c(0.0, 1.0));
        assert_eq!(j.get(1, 0), c(0.0, -1.0));
        assert!(j.is_hermitian(0.0));
        assert_eq!(j.trace(), c(0.0, 0.0));
        let s = 0.5f64.sqrt();
        assert_eq!(j.expectation(&[c(s, 0.0), c(s, 0.0)]), c(0.0, 0.0));
        assert!(chain_current_operator(1, 1).is_err());
    }

    #[test]
    fn operator_matches_direct_formula() {
        let psi = [c(0.3, 0.1), c(-0.2, 0.5), c(0.7, -0.4)];
        for l in 0..2 {
            let j = chain_current_operator(l, 2).unwrap();
            assert!((j.expectation(&psi).re - expectation_current(&psi, l)).abs() < 1e-15);
        }
    }

    #[test]
    fn n1_closed_forms() {
        for g in [0.2, 0.5, 0.9] {
            for r in solve_secular(1, g).unwrap() {
                let f = eigenfunction(&r, 1, g).unwrap();
                assert!((expectation_current(&f.values, 0) - g).abs() < 1e-12);
            }
        }
        for g in [1.5, 2.0, 4.0] {
            for r in solve_secular_broken(1, g).unwrap() {
                let f = eigenfunction(&r, 1, g).unwrap();
                assert!((expectation_current(&f.values, 0) - 1.0 / g).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn biorthogonal_current_vanishes() {
        for g in [0.0, 0.5, 2.0] {
            assert!(biorthogonal_current_n1(g).unwrap() < 1e-12);
        }
        assert!(matches!(biorthogonal_current_n1(1.0), Err(Error::AtExceptionalPoint)));
        // The right-vector current does not vanish.
        assert!(right_current_n1(0.5).unwrap().iter().all(|j| (j - 0.5).abs() < 1e-12));
    }

    #[test]
    fn real_k_currents_are_uniform_and_closed_form() {
        for n in 2..=9 {
            let g = 0.7 * exceptional_point(n);
            for r in solve_secular(n, g).unwrap() {
                let f = eigenfunction(&r, n, g).unwrap();
                let p = CurrentProfile::new(0, &f.values);
                assert!(p.spread() < 1e-10);
                let want = closed_form_current(n, g, r.k.re);
                assert!((p.values[0] - want).abs() < 1e-12);
                assert!((p.average - p.values[0]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ep_currents() {
        assert!((ep_current(9) - 0.2).abs() < 1e-15);
        assert!((ep_current(8) - 0.223607).abs() < 1e-6);
        for n in [3, 8, 9] {
            let g = exceptional_point(n);
            let roots = solve_secular(n, g).unwrap();
            let f = eigenfunction(roots.last().unwrap(), n, g).unwrap();
            assert!((average_current(&f.values) - ep_current(n)).abs() < 1e-12);
        }
    }

    #[test]
    fn broken_profiles_mirror() {
        let n = 6;
        let g = 1.5;
        let pair = solve_secular_broken(n, g).unwrap();
        let a = CurrentProfile::new(0, &eigenfunction(&pair[0], n, g).unwrap().values);
        let b = CurrentProfile::new(1, &eigenfunction(&pair[1], n, g).unwrap().values);
        assert!(a.spread() > 1e-3);
        for l in 0..n {
            assert!((a.values[l] - b.values[n - 1 - l]).abs() < 1e-12);
        }
    }

    #[test]
    fn tree_current_matches_chain() {
        let spec = TreeSpec::uniform(2, 2, 0.4).unwrap();
        let index = build_index(&spec).unwrap();
        for s in extended_states(&spec, &index).unwrap() {
            for l in 0..2 {
                let tree = tree_current_expectation(&s.full_vector, &spec, &index, l).unwrap();
                let chain = expectation_current(&s.chain_pair.vector, l);
                assert!((tree - chain).abs() < 1e-10);
            }
        }
        for s in all_localized(&spec, &index).unwrap() {
            for l in 0..s.mode.generation {
                let j = tree_current_expectation(&s.full_vector, &spec, &index, l).unwrap();
                assert_eq!(j, 0.0);
            }
        }
        let real = vec![c(0.25, 0.0); index.n_tot()];
        assert_eq!(tree_current_expectation(&real, &spec, &index, 0).unwrap(), 0.0);
    }

    #[test]
    fn weighted_convention_scales_links() {
        let chain = ChainSpec::new(vec![1.0, 1.2, 0.9], 0.4, 0.4).unwrap();
        let plain = chain_state_currents(&chain, CurrentConvention::Unweighted).unwrap();
        let weighted = chain_state_currents(&chain, CurrentConvention::HoppingWeighted).unwrap();
        for ((_, a), (_, b)) in plain.iter().zip(&weighted) {
            for l in 0..3 {
                assert!((b.values[l] - a.values[l] * chain.hoppings()[l]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn n1_sweep_maximum_at_ep() {
        let grid: Vec<f64> = (1..=300).map(|i| i as f64 * 0.01).collect();
        let rows = uniform_current_sweep(1, &grid).unwrap();
        let (g, j) = sweep_maximum(&rows).unwrap();
        assert!((g - 1.0).abs() < 1e-9);
        assert!((j - 1.0).abs() < 1e-12);
    }
}
