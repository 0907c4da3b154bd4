//! Finite Cayley tree: specification, site indexing and operator assembly.
//!
//! Sites are numbered breadth-first, generation by generation, with the
//! children of a site kept in child-index order. Under this ordering the
//! sites of one generation form a contiguous id range, and so do the
//! descendants of any site within any deeper generation.

use std::fmt;
use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseComplexMatrix;

/// Default upper bound on the number of sites an index may cover.
pub const DEFAULT_SIZE_CAP: usize = 1_000_000;

/// Generations, per-generation branching numbers and the drain/source
/// strengths of a finite Cayley tree.
///
/// `branching[ℓ-1]` is the number of children each generation-(ℓ-1) site
/// has in generation ℓ. The drain `-iγ₀` sits on the origin and the source
/// `+iγ_N` on every site of the outermost generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSpec {
    branching: Vec<usize>,
    #[serde(rename = "gamma0")]
    gamma0: f64,
    #[serde(rename = "gammaN")]
    gamma_n: f64,
}

impl TreeSpec {
    /// Validated spec; the branching list fixes the number of generations.
    pub fn new(branching: Vec<usize>, gamma0: f64, gamma_n: f64) -> Result<Self> {
        validate_branching(&branching)?;
        for (name, g) in [("gamma0", gamma0), ("gammaN", gamma_n)] {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::InvalidSpec(format!("{name} must be a positive real, got {g}")));
            }
        }
        Ok(Self {
            branching,
            gamma0,
            gamma_n,
        })
    }

    /// Spec with `γ₀ = γ_N = 0`: the Hermitian limit, which the validated
    /// constructor rejects.
    pub fn hermitian(branching: Vec<usize>) -> Result<Self> {
        validate_branching(&branching)?;
        Ok(Self {
            branching,
            gamma0: 0.0,
            gamma_n: 0.0,
        })
    }

    /// Uniform branching `n` over `generations` generations with `γ₀ = γ_N = γ`.
    pub fn uniform(generations: usize, n: usize, gamma: f64) -> Result<Self> {
        Self::new(vec![n; generations], gamma, gamma)
    }

    pub fn generations(&self) -> usize {
        self.branching.len()
    }

    pub fn branching(&self) -> &[usize] {
        &self.branching
    }

    /// Branching number `n_ℓ` for `1 ≤ ℓ ≤ N`.
    pub fn branching_at(&self, generation: usize) -> usize {
        self.branching[generation - 1]
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn gamma_n(&self) -> f64 {
        self.gamma_n
    }

    /// Sites per generation, `n_tot_ℓ = ∏_{m≤ℓ} n_m` for `ℓ = 0..=N`, in
    /// exact integer arithmetic.
    pub fn generation_sizes(&self) -> Vec<u128> {
        let mut sizes = Vec::with_capacity(self.branching.len() + 1);
        let mut acc: u128 = 1;
        sizes.push(acc);
        for &n in &self.branching {
            acc = acc.saturating_mul(n as u128);
            sizes.push(acc);
        }
        sizes
    }

    /// Total site count `n_tot = Σ_ℓ n_tot_ℓ`.
    pub fn n_tot(&self) -> u128 {
        self.generation_sizes()
            .into_iter()
            .fold(0u128, |a, b| a.saturating_add(b))
    }

    /// Whether every generation has the same branching number.
    pub fn uniform_branching(&self) -> Option<usize> {
        let first = *self.branching.first()?;
        self.branching.iter().all(|&n| n == first).then_some(first)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        validate_branching(&self.branching)?;
        for (name, g) in [("gamma0", self.gamma0), ("gammaN", self.gamma_n)] {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "{name} must be finite and non-negative, got {g}"
                )));
            }
        }
        Ok(())
    }
}

fn validate_branching(branching: &[usize]) -> Result<()> {
    if branching.is_empty() {
        return Err(Error::InvalidSpec("at least one generation is required".into()));
    }
    if let Some(pos) = branching.iter().position(|&n| n == 0) {
        return Err(Error::InvalidSpec(format!(
            "branching number of generation {} must be at least 1",
            pos + 1
        )));
    }
    Ok(())
}

/// Path from the origin: the 1-based child index taken at each generation.
/// The empty path is the origin.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SitePath(pub Vec<usize>);

impl SitePath {
    pub fn origin() -> Self {
        Self(Vec::new())
    }

    pub fn generation(&self) -> usize {
        self.0.len()
    }

    pub fn child(&self, index: usize) -> Self {
        let mut p = self.0.clone();
        p.push(index);
        Self(p)
    }

    pub fn parent(&self) -> Option<Self> {
        let (_, rest) = self.0.split_last()?;
        Some(Self(rest.to_vec()))
    }
}

impl fmt::Display for SitePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "[0]");
        }
        write!(f, "[")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

/// Bijection between site paths and dense ids in `[0, n_tot)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeIndex {
    branching: Vec<usize>,
    /// `offsets[g]` is the first id of generation `g`; `offsets[N+1] = n_tot`.
    offsets: Vec<usize>,
}

/// Builds the breadth-first index with the default size cap.
pub fn build_index(spec: &TreeSpec) -> Result<TreeIndex> {
    build_index_with_cap(spec, DEFAULT_SIZE_CAP)
}

pub fn build_index_with_cap(spec: &TreeSpec, cap: usize) -> Result<TreeIndex> {
    spec.validate()?;
    let n_tot = spec.n_tot();
    if n_tot > cap as u128 {
        return Err(Error::TooLarge { n_tot, cap });
    }
    let mut offsets = Vec::with_capacity(spec.generations() + 2);
    let mut start = 0usize;
    for size in spec.generation_sizes() {
        offsets.push(start);
        start += size as usize;
    }
    offsets.push(start);
    Ok(TreeIndex {
        branching: spec.branching().to_vec(),
        offsets,
    })
}

impl TreeIndex {
    pub fn n_tot(&self) -> usize {
        *self.offsets.last().expect("offsets are never empty")
    }

    pub fn generations(&self) -> usize {
        self.branching.len()
    }

    pub fn generation_offsets(&self) -> &[usize] {
        &self.offsets[..self.offsets.len() - 1]
    }

    pub fn generation_range(&self, generation: usize) -> Range<usize> {
        self.offsets[generation]..self.offsets[generation + 1]
    }

    pub fn generation_of(&self, id: usize) -> usize {
        debug_assert!(id < self.n_tot());
        self.offsets.partition_point(|&o| o <= id) - 1
    }

    pub fn parent(&self, id: usize) -> Option<usize> {
        let g = self.generation_of(id);
        if g == 0 {
            return None;
        }
        let local = id - self.offsets[g];
        Some(self.offsets[g - 1] + local / self.branching[g - 1])
    }

    /// Ids of the direct children of `id` (empty for peripheral sites).
    pub fn children(&self, id: usize) -> Range<usize> {
        let g = self.generation_of(id);
        if g == self.generations() {
            return id..id;
        }
        let n = self.branching[g];
        let start = self.offsets[g + 1] + (id - self.offsets[g]) * n;
        start..start + n
    }

    /// Ids of all descendants of `id` lying in generation `generation`
    /// (the site itself when the generations coincide).
    pub fn descendants_at(&self, id: usize, generation: usize) -> Range<usize> {
        let g = self.generation_of(id);
        assert!(generation >= g && generation <= self.generations());
        let width: usize = self.branching[g..generation].iter().product();
        let start = self.offsets[generation] + (id - self.offsets[g]) * width;
        start..start + width
    }

    pub fn id_of(&self, path: &SitePath) -> Result<usize> {
        let g = path.generation();
        if g > self.generations() {
            return Err(Error::OutOfRange(format!(
                "{path} is deeper than generation {}",
                self.generations()
            )));
        }
        let mut local = 0usize;
        for (m, &step) in path.0.iter().enumerate() {
            let n = self.branching[m];
            if step == 0 || step > n {
                return Err(Error::OutOfRange(format!(
                    "{path}: child index {step} at generation {} must lie in [1, {n}]",
                    m + 1
                )));
            }
            local = local * n + (step - 1);
        }
        Ok(self.offsets[g] + local)
    }

    pub fn path_of(&self, id: usize) -> Result<SitePath> {
        if id >= self.n_tot() {
            return Err(Error::OutOfRange(format!("site id {id} >= n_tot {}", self.n_tot())));
        }
        let g = self.generation_of(id);
        let mut local = id - self.offsets[g];
        let mut path = vec![0; g];
        for m in (0..g).rev() {
            let n = self.branching[m];
            path[m] = local % n + 1;
            local /= n;
        }
        Ok(SitePath(path))
    }

    fn matches(&self, spec: &TreeSpec) -> Result<()> {
        if self.branching != spec.branching() {
            return Err(Error::DimensionMismatch {
                expected: spec.n_tot() as usize,
                got: self.n_tot(),
            });
        }
        Ok(())
    }
}

/// Total Hamiltonian: hopping `-1` on every parent/child link, `-iγ₀` on the
/// origin and `+iγ_N` on every peripheral site.
pub fn assemble_hamiltonian(spec: &TreeSpec, index: &TreeIndex) -> Result<SparseComplexMatrix> {
    index.matches(spec)?;
    let n = index.n_tot();
    let hop = Complex64::new(-1.0, 0.0);
    let mut triplets = Vec::with_capacity(2 * n + index.generation_range(spec.generations()).len() + 1);
    triplets.push((0, 0, Complex64::new(0.0, -spec.gamma0())));
    for id in 1..n {
        let p = index.parent(id).expect("non-origin site has a parent");
        triplets.push((p, id, hop));
        triplets.push((id, p, hop));
    }
    for id in index.generation_range(spec.generations()) {
        triplets.push((id, id, Complex64::new(0.0, spec.gamma_n())));
    }
    SparseComplexMatrix::from_triplets(n, triplets)
}

/// Current operator on one link, positive for flow toward the origin:
/// entry `(parent, child) = +i`, `(child, parent) = -i`, so that
/// `⟨ψ|J|ψ⟩ = -2 Im[ψ(child) ψ(parent)*]`.
pub fn link_current_operator(parent: &SitePath, child: &SitePath, index: &TreeIndex) -> Result<SparseComplexMatrix> {
    if child.parent().as_ref() != Some(parent) {
        return Err(Error::NotAdjacent {
            parent: parent.to_string(),
            child: child.to_string(),
        });
    }
    let p = index.id_of(parent)?;
    let c = index.id_of(child)?;
    link_current_by_id(p, c, index.n_tot())
}

pub(crate) fn link_current_by_id(parent: usize, child: usize, dim: usize) -> Result<SparseComplexMatrix> {
    SparseComplexMatrix::from_triplets(
        dim,
        [
            (parent, child, Complex64::new(0.0, 1.0)),
            (child, parent, Complex64::new(0.0, -1.0)),
        ],
    )
}

/// `-2 Im[ψ(child) ψ(parent)*]`, the link-current expectation without
/// materializing the operator.
pub(crate) fn link_current_value(state: &[Complex64], parent: usize, child: usize) -> f64 {
    -2.0 * (state[child] * state[parent].conj()).im
}
