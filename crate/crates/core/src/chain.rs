//! The `(N+1)`-site effective chain carrying the extended states.
//!
//! For uniform branching `n` and `γ₀ = γ_N = γ` the chain scaled by `1/√n`
//! has unit hoppings and boundary potentials `∓iγ̃`, `γ̃ = γ/√n`. Its
//! eigenvalues `Ẽ = −2 cos k` follow from the secular equation
//! `−sin((N+2)k)/sin(Nk) = γ̃²`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::io::Write;

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{TreeIndex, TreeSpec};
use crate::sparse::SparseComplexMatrix;
use crate::spectral::{eig_dense, overlap, EigenPair};

/// Half-width of the window around an exceptional point inside which roots
/// are reported as the merged `k = π/2` root.
pub const EP_WINDOW: f64 = 1e-8;

/// Tridiagonal chain with hoppings `−t_ℓ`, `−iγ₀` on site 0 and `+iγ_N`
/// on site `N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSpec {
    hoppings: Vec<f64>,
    gamma0: f64,
    gamma_n: f64,
}

impl ChainSpec {
    pub fn new(hoppings: Vec<f64>, gamma0: f64, gamma_n: f64) -> Result<Self> {
        if hoppings.is_empty() {
            return Err(Error::InvalidSpec("chain needs at least one hopping".into()));
        }
        if let Some(t) = hoppings.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::InvalidSpec(format!(
                "hopping magnitudes must be positive, got {t}"
            )));
        }
        for g in [gamma0, gamma_n] {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "boundary strength must be non-negative, got {g}"
                )));
            }
        }
        Ok(Self {
            hoppings,
            gamma0,
            gamma_n,
        })
    }

    /// Uniform unit-hopping chain with `γ₀ = γ_N = γ̃`.
    pub fn scaled_uniform(generations: usize, gamma_tilde: f64) -> Result<Self> {
        Self::new(vec![1.0; generations], gamma_tilde, gamma_tilde)
    }

    pub fn generations(&self) -> usize {
        self.hoppings.len()
    }

    pub fn size(&self) -> usize {
        self.hoppings.len() + 1
    }

    pub fn hoppings(&self) -> &[f64] {
        &self.hoppings
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn gamma_n(&self) -> f64 {
        self.gamma_n
    }

    /// Same hoppings with both boundary strengths set to `gamma`.
    pub fn with_gamma(&self, gamma: f64) -> Self {
        Self {
            hoppings: self.hoppings.clone(),
            gamma0: gamma,
            gamma_n: gamma,
        }
    }

    /// Every entry divided by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            hoppings: self.hoppings.iter().map(|t| t / s).collect(),
            gamma0: self.gamma0 / s,
            gamma_n: self.gamma_n / s,
        }
    }

    pub fn matrix(&self) -> SparseComplexMatrix {
        let n = self.generations();
        let mut t = Vec::with_capacity(2 * n + 2);
        t.push((0, 0, Complex64::new(0.0, -self.gamma0)));
        t.push((n, n, Complex64::new(0.0, self.gamma_n)));
        for (l, &h) in self.hoppings.iter().enumerate() {
            t.push((l, l + 1, Complex64::new(-h, 0.0)));
            t.push((l + 1, l, Complex64::new(-h, 0.0)));
        }
        SparseComplexMatrix::from_triplets(n + 1, t).expect("indices lie inside the chain")
    }

    pub fn dense(&self) -> Mat<Complex64> {
        self.matrix().to_dense()
    }

    pub fn eigenpairs(&self) -> Result<Vec<EigenPair>> {
        eig_dense(&self.matrix())
    }
}

/// The chain whose eigenstates lift to the extended states of the tree:
/// hoppings `√n_ℓ`, boundary strengths `γ₀`, `γ_N`.
pub fn effective_chain(spec: &TreeSpec) -> ChainSpec {
    ChainSpec {
        hoppings: spec.branching().iter().map(|&n| (n as f64).sqrt()).collect(),
        gamma0: spec.gamma0(),
        gamma_n: spec.gamma_n(),
    }
}

/// Uniform chain in scaled units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledChain {
    pub generations: usize,
    pub gamma_tilde: f64,
}

impl ScaledChain {
    pub fn new(generations: usize, gamma_tilde: f64) -> Result<Self> {
        if generations == 0 {
            return Err(Error::InvalidSpec("N must be at least 1".into()));
        }
        if !(gamma_tilde.is_finite() && gamma_tilde >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "gamma_tilde must be non-negative, got {gamma_tilde}"
            )));
        }
        Ok(Self {
            generations,
            gamma_tilde,
        })
    }

    /// Scaled form of a uniform tree with `γ₀ = γ_N`; `None` otherwise.
    pub fn from_tree(spec: &TreeSpec) -> Option<Self> {
        let n = spec.uniform_branching()?;
        (spec.gamma0() == spec.gamma_n()).then(|| Self {
            generations: spec.generations(),
            gamma_tilde: spec.gamma0() / (n as f64).sqrt(),
        })
    }

    pub fn chain(&self) -> ChainSpec {
        ChainSpec {
            hoppings: vec![1.0; self.generations],
            gamma0: self.gamma_tilde,
            gamma_n: self.gamma_tilde,
        }
    }

    pub fn roots(&self) -> Result<Vec<SecularRoot>> {
        solve_secular(self.generations, self.gamma_tilde)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Phase {
    PtUnbroken,
    PtBrokenPlus,
    PtBrokenMinus,
    ZeroMode,
    /// The merged root at an exceptional point; see
    /// [`SecularRoot::multiplicity`].
    Exceptional,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::PtUnbroken => "PT_unbroken",
            Phase::PtBrokenPlus => "PT_broken_plus",
            Phase::PtBrokenMinus => "PT_broken_minus",
            Phase::ZeroMode => "zero_mode",
            Phase::Exceptional => "exceptional",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecularRoot {
    pub k: Complex64,
    /// `|Im k|`; zero for real roots.
    pub kappa: f64,
    pub phase: Phase,
    /// Scaled energy `−2 cos k`.
    pub energy: Complex64,
    /// Number of coalesced eigenvalues represented (1 except at an EP).
    pub multiplicity: usize,
}

impl SecularRoot {
    fn real(k: f64, phase: Phase) -> Self {
        let energy = if phase == Phase::ZeroMode {
            Complex64::default()
        } else {
            Complex64::new(-2.0 * k.cos(), 0.0)
        };
        Self {
            k: Complex64::new(k, 0.0),
            kappa: 0.0,
            phase,
            energy,
            multiplicity: 1,
        }
    }

    fn broken(kappa: f64, plus: bool) -> Self {
        let s = if plus { 1.0 } else { -1.0 };
        Self {
            k: Complex64::new(FRAC_PI_2, s * kappa),
            kappa,
            phase: if plus {
                Phase::PtBrokenPlus
            } else {
                Phase::PtBrokenMinus
            },
            energy: Complex64::new(0.0, 2.0 * s * kappa.sinh()),
            multiplicity: 1,
        }
    }
}

/// `γ̃_EP`: 1 for odd `N`, `√((N+2)/N)` for even `N`.
pub fn exceptional_point(generations: usize) -> f64 {
    if generations % 2 == 1 {
        1.0
    } else {
        ((generations as f64 + 2.0) / generations as f64).sqrt()
    }
}

/// `f(k) = −sin((N+2)k)/sin(Nk)`.
pub fn secular_f(generations: usize, k: f64) -> f64 {
    let n = generations as f64;
    -((n + 2.0) * k).sin() / (n * k).sin()
}

fn secular_g(n: f64, g2: f64, k: f64) -> f64 {
    ((n + 2.0) * k).sin() + g2 * (n * k).sin()
}

/// Function whose zeros on `(0, π/2]` are the secular roots there. For even
/// `N` the zero mode at `π/2` is divided out.
fn half_interval_fn(generations: usize, g2: f64, k: f64) -> f64 {
    let n = generations as f64;
    if generations % 2 == 1 {
        return secular_g(n, g2, k);
    }
    let c = (FRAC_PI_2 - k).sin();
    if c.abs() < 1e-300 {
        // Limit at π/2: −g'(π/2).
        let sign = if (generations / 2) % 2 == 0 { 1.0 } else { -1.0 };
        return -sign * (g2 * n - (n + 2.0));
    }
    secular_g(n, g2, k) / c
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Roots of the secular function strictly inside `(0, π/2)` plus, for odd
/// `N`, an exact root at `π/2`.
fn half_roots(generations: usize, gamma_tilde: f64) -> Vec<f64> {
    let g2 = gamma_tilde * gamma_tilde;
    let samples = 400 * (generations + 2);
    let f = |k: f64| half_interval_fn(generations, g2, k);
    let mut roots = Vec::new();
    let mut k_prev = 0.0;
    let mut f_prev = f(0.0);
    // f(0) can vanish only through the excluded trivial root; step off it.
    if f_prev == 0.0 {
        k_prev = 1e-12;
        f_prev = f(k_prev);
    }
    for i in 1..=samples {
        let k = FRAC_PI_2 * i as f64 / samples as f64;
        let fk = if i == samples { f(FRAC_PI_2) } else { f(k) };
        if fk == 0.0 && i < samples {
            roots.push(k);
        } else if fk != 0.0 && f_prev != 0.0 && (fk < 0.0) != (f_prev < 0.0) {
            roots.push(bisect(f, k_prev, k));
        }
        k_prev = k;
        f_prev = fk;
    }
    if f_prev == 0.0 && generations % 2 == 1 {
        roots.push(FRAC_PI_2);
    }
    roots
}

/// Real roots `k ∈ (0, π)`, ascending, with the even-`N` zero mode tagged.
pub fn solve_secular_real(generations: usize, gamma_tilde: f64) -> Result<Vec<SecularRoot>> {
    ScaledChain::new(generations, gamma_tilde)?;
    let ep = exceptional_point(generations);
    let near_ep = (gamma_tilde - ep).abs() < EP_WINDOW;
    let odd = generations % 2 == 1;
    // Real roots on (0, π/2) away from the coalescing ones.
    let base = if odd {
        (generations - 1) / 2
    } else {
        (generations - 2) / 2
    };
    let mut half = half_roots(generations, gamma_tilde);
    half.sort_by(f64::total_cmp);
    let expected_half = if near_ep {
        half.truncate(base.min(half.len()));
        base
    } else if gamma_tilde < ep {
        base + 1
    } else {
        base
    };
    if half.len() != expected_half {
        return Err(Error::RootCount {
            generations,
            gamma_tilde,
            expected: expected_half,
            found: half.len(),
        });
    }
    let mut roots: Vec<SecularRoot> = half.iter().map(|&k| SecularRoot::real(k, Phase::PtUnbroken)).collect();
    if !odd && !near_ep {
        roots.push(SecularRoot::real(FRAC_PI_2, Phase::ZeroMode));
    }
    roots.extend(
        half.iter()
            .rev()
            .map(|&k| SecularRoot::real(std::f64::consts::PI - k, Phase::PtUnbroken)),
    );
    Ok(roots)
}

/// Ratio `cosh((N+2)κ)/cosh(Nκ)` (odd `N`) or the sinh analogue (even `N`),
/// in a form that neither overflows nor cancels.
pub fn broken_ratio(generations: usize, kappa: f64) -> f64 {
    let n = generations as f64;
    if generations % 2 == 1 {
        let a = (-2.0 * (n + 2.0) * kappa).exp();
        let b = (-2.0 * n * kappa).exp();
        (2.0 * kappa).exp() * (1.0 + a) / (1.0 + b)
    } else if kappa == 0.0 {
        (n + 2.0) / n
    } else {
        let a = -(-2.0 * (n + 2.0) * kappa).exp_m1();
        let b = -(-2.0 * n * kappa).exp_m1();
        (2.0 * kappa).exp() * a / b
    }
}

/// `κ − ln γ̃` for a solution `κ` of the broken-phase ratio equation,
/// written without cancellation:
/// `½[ln(1 ± e^{−2Nκ}) − ln(1 ± e^{−2(N+2)κ})]` (upper sign for odd `N`).
pub fn broken_log_offset(generations: usize, kappa: f64) -> f64 {
    let n = generations as f64;
    let s = if generations % 2 == 1 { 1.0 } else { -1.0 };
    0.5 * ((s * (-2.0 * n * kappa).exp()).ln_1p() - (s * (-2.0 * (n + 2.0) * kappa).exp()).ln_1p())
}

/// The broken pair `k = π/2 ± iκ`, `+` first.
pub fn solve_secular_broken(generations: usize, gamma_tilde: f64) -> Result<Vec<SecularRoot>> {
    ScaledChain::new(generations, gamma_tilde)?;
    let ep = exceptional_point(generations);
    if gamma_tilde <= ep {
        return Err(Error::Phase { gamma_tilde, ep });
    }
    let g2 = gamma_tilde * gamma_tilde;
    // The ratio is at least cosh 2κ, so κ_hi = acosh(γ̃²)/2 brackets it.
    let mut hi = 0.5 * g2.acosh() + 1.0;
    while broken_ratio(generations, hi) < g2 {
        hi *= 2.0;
    }
    let kappa = bisect(|x| broken_ratio(generations, x) / g2 - 1.0, 0.0, hi);
    Ok(vec![
        SecularRoot::broken(kappa, true),
        SecularRoot::broken(kappa, false),
    ])
}

/// All `N + 1` roots (counting an exceptional root with its multiplicity),
/// ordered: real roots ascending in `k`, then any broken pair or merged root.
pub fn solve_secular(generations: usize, gamma_tilde: f64) -> Result<Vec<SecularRoot>> {
    let ep = exceptional_point(generations);
    let mut roots = solve_secular_real(generations, gamma_tilde)?;
    if (gamma_tilde - ep).abs() < EP_WINDOW {
        roots.push(SecularRoot {
            k: Complex64::new(FRAC_PI_2, 0.0),
            kappa: 0.0,
            phase: Phase::Exceptional,
            energy: Complex64::default(),
            multiplicity: if generations % 2 == 1 { 2 } else { 3 },
        });
    } else if gamma_tilde > ep {
        roots.extend(solve_secular_broken(generations, gamma_tilde)?);
    }
    let total: usize = roots.iter().map(|r| r.multiplicity).sum();
    if total != generations + 1 {
        return Err(Error::RootCount {
            generations,
            gamma_tilde,
            expected: generations + 1,
            found: total,
        });
    }
    Ok(roots)
}

/// Relative residual of a root in its defining equation.
pub fn root_residual(generations: usize, gamma_tilde: f64, root: &SecularRoot) -> f64 {
    let g2 = gamma_tilde * gamma_tilde;
    let scale = g2.max(1.0);
    match root.phase {
        Phase::PtUnbroken => (secular_f(generations, root.k.re) - g2).abs() / scale,
        Phase::PtBrokenPlus | Phase::PtBrokenMinus => (broken_ratio(generations, root.kappa) - g2).abs() / scale,
        Phase::ZeroMode => secular_g(generations as f64, g2, root.k.re).abs(),
        Phase::Exceptional => (gamma_tilde - exceptional_point(generations)).abs(),
    }
}

/// Chain amplitudes `ψ(0..=N)` of an extended state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtendedEigenfunction {
    pub root: SecularRoot,
    pub gamma_tilde: f64,
    pub values: Vec<Complex64>,
    pub normalized: bool,
}

impl ExtendedEigenfunction {
    pub fn generations(&self) -> usize {
        self.values.len() - 1
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Unnormalized `ψ(ℓ) = 2i sin(k(ℓ+1)) + 2γ̃ sin(kℓ)`, valid for complex `k`.
pub fn raw_eigenfunction(generations: usize, gamma_tilde: f64, k: Complex64) -> Vec<Complex64> {
    let i2 = Complex64::new(0.0, 2.0);
    (0..=generations)
        .map(|l| {
            let l = l as f64;
            i2 * (k * (l + 1.0)).sin() + 2.0 * gamma_tilde * (k * l).sin()
        })
        .collect()
}

/// Closed squared norm `2N(1+γ̃²)+4` of the real-`k` raw eigenfunction.
pub fn real_norm_squared(generations: usize, gamma_tilde: f64) -> f64 {
    2.0 * generations as f64 * (1.0 + gamma_tilde * gamma_tilde) + 4.0
}

/// Broken-phase amplitudes written with hyperbolic functions, up to a
/// common factor; `plus` selects `k = π/2 + iκ`.
pub fn broken_branch_form(generations: usize, gamma_tilde: f64, kappa: f64, plus: bool) -> Vec<Complex64> {
    let s = if plus { 1.0 } else { -1.0 };
    (0..=generations)
        .map(|l| {
            let lf = l as f64;
            let body = if l % 2 == 0 {
                (kappa * (lf + 1.0)).cosh() + s * gamma_tilde * (kappa * lf).sinh()
            } else {
                -s * (kappa * (lf + 1.0)).sinh() - gamma_tilde * (kappa * lf).cosh()
            };
            Complex64::new(0.0, 1.0).powu(l as u32 + 1) * 2.0 * body
        })
        .collect()
}

/// Unit-norm eigenfunction for a root of the uniform chain.
pub fn eigenfunction(root: &SecularRoot, generations: usize, gamma_tilde: f64) -> Result<ExtendedEigenfunction> {
    let mut values = raw_eigenfunction(generations, gamma_tilde, root.k);
    let norm = match root.phase {
        Phase::PtUnbroken | Phase::ZeroMode | Phase::Exceptional => real_norm_squared(generations, gamma_tilde).sqrt(),
        Phase::PtBrokenPlus | Phase::PtBrokenMinus => values.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt(),
    };
    for v in &mut values {
        *v /= norm;
    }
    let chain = ChainSpec::scaled_uniform(generations, gamma_tilde)?;
    let res = crate::spectral::residual(&chain.matrix(), root.energy, &values);
    // The merged root is only approximately an eigenvector inside the window.
    let tol = if root.phase == Phase::Exceptional { 1e-3 } else { 1e-8 };
    if !(res <= tol) {
        return Err(Error::InconsistentRoot(res));
    }
    Ok(ExtendedEigenfunction {
        root: *root,
        gamma_tilde,
        values,
        normalized: true,
    })
}

/// Secular-root table: `gamma_tilde,k_re,k_im,E_re,E_im,phase`.
pub fn write_roots_csv<W: Write>(rows: &[(f64, Vec<SecularRoot>)], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["gamma_tilde", "k_re", "k_im", "E_re", "E_im", "phase"])?;
    for (g, roots) in rows {
        for r in roots {
            out.write_record([
                format!("{g:.12e}"),
                format!("{:.15e}", r.k.re),
                format!("{:.15e}", r.k.im),
                format!("{:.15e}", r.energy.re),
                format!("{:.15e}", r.energy.im),
                r.phase.as_str().to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PtReport {
    /// `max |P M* P − M|` entrywise.
    pub max_deviation: f64,
    pub symmetric: bool,
    /// `(E, unbroken)` for each eigenpair, in solver order.
    pub classes: Vec<(Complex64, bool)>,
}

/// Checks `P conj(M) P = M` with the reversal permutation `P` and classifies
/// eigenpairs by whether `P v*` is parallel to `v`.
pub fn check_pt_symmetry(matrix: &SparseComplexMatrix, tol: f64) -> Result<PtReport> {
    let n = matrix.dim();
    let reflected = SparseComplexMatrix::from_triplets(
        n,
        matrix
            .entries()
            .iter()
            .map(|&(r, c, v)| (n - 1 - r, n - 1 - c, v.conj())),
    )?;
    let max_deviation = matrix.max_abs_diff(&reflected);
    let pairs = eig_dense(matrix)?;
    let classes = pairs
        .iter()
        .map(|p| {
            let pt: Vec<Complex64> = p.vector.iter().rev().map(|x| x.conj()).collect();
            (p.value, overlap(&p.vector, &pt) > 1.0 - 1e-8)
        })
        .collect();
    Ok(PtReport {
        max_deviation,
        symmetric: max_deviation <= tol,
        classes,
    })
}

/// Extended eigenstate of the tree: a chain eigenpair lifted so that every
/// site of generation `ℓ` carries `ψ(ℓ)/√n_tot_ℓ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtendedState {
    pub chain_pair: EigenPair,
    pub full_vector: Vec<Complex64>,
}

pub fn lift_to_tree(spec: &TreeSpec, index: &TreeIndex, chain_vector: &[Complex64]) -> Result<Vec<Complex64>> {
    if chain_vector.len() != spec.generations() + 1 {
        return Err(Error::DimensionMismatch {
            expected: spec.generations() + 1,
            got: chain_vector.len(),
        });
    }
    let sizes = spec.generation_sizes();
    let mut v = vec![Complex64::default(); index.n_tot()];
    for (l, &psi) in chain_vector.iter().enumerate() {
        let amp = psi / (sizes[l] as f64).sqrt();
        for site in index.generation_range(l) {
            v[site] = amp;
        }
    }
    Ok(v)
}

/// All `N + 1` extended states from the unscaled effective chain.
pub fn extended_states(spec: &TreeSpec, index: &TreeIndex) -> Result<Vec<ExtendedState>> {
    effective_chain(spec)
        .eigenpairs()?
        .into_iter()
        .map(|p| {
            let full_vector = lift_to_tree(spec, index, &p.vector)?;
            Ok(ExtendedState {
                chain_pair: p,
                full_vector,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{assemble_hamiltonian, build_index};
    use crate::spectral::{eigenvalues, match_spectra, residual};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn effective_chain_layout() {
        let spec = TreeSpec::new(vec![4, 9], 1.0, 1.0).unwrap();
        let m = effective_chain(&spec).matrix();
        assert_eq!(m.get(0, 1), c(-2.0, 0.0));
        assert_eq!(m.get(2, 1), c(-3.0, 0.0));
        assert_eq!(m.get(0, 0), c(0.0, -1.0));
        assert_eq!(m.get(2, 2), c(0.0, 1.0));
        assert!(m.is_transpose_symmetric(0.0));
    }

    #[test]
    fn scaling_gives_unit_hoppings() {
        let spec = TreeSpec::uniform(3, 4, 0.6).unwrap();
        let scaled = effective_chain(&spec).scaled(2.0);
        let sc = ScaledChain::from_tree(&spec).unwrap();
        assert_eq!(sc.gamma_tilde, 0.3);
        assert_eq!(scaled, sc.chain());
    }

    #[test]
    fn hermitian_open_chain_roots() {
        for n in 1..=8 {
            let roots = solve_secular(n, 0.0).unwrap();
            assert_eq!(roots.len(), n + 1);
            for (j, r) in roots.iter().enumerate() {
                let k = (j + 1) as f64 * std::f64::consts::PI / (n + 2) as f64;
                assert!((r.k.re - k).abs() < 1e-12, "N={n} j={j}");
            }
        }
    }

    #[test]
    fn n1_energies() {
        let roots = solve_secular(1, 0.6).unwrap();
        assert!((roots[0].energy - c(-0.8, 0.0)).norm() < 1e-12);
        assert!((roots[1].energy - c(0.8, 0.0)).norm() < 1e-12);
        let roots = solve_secular(1, 2.0).unwrap();
        assert_eq!(roots.len(), 2);
        let e: Vec<_> = roots.iter().map(|r| r.energy).collect();
        assert!((e[0] - c(0.0, 3f64.sqrt())).norm() < 1e-12);
        assert!((e[1] - c(0.0, -(3f64.sqrt()))).norm() < 1e-12);
    }

    #[test]
    fn n2_has_zero_mode_below_ep() {
        let roots = solve_secular(2, 1.2).unwrap();
        let phases: Vec<Phase> = roots.iter().map(|r| r.phase).collect();
        assert_eq!(phases, vec![Phase::PtUnbroken, Phase::ZeroMode, Phase::PtUnbroken]);
        let oracle = eigenvalues(&ChainSpec::scaled_uniform(2, 1.2).unwrap().eigenpairs().unwrap());
        let ours: Vec<_> = roots.iter().map(|r| r.energy).collect();
        assert!(match_spectra(&ours, &oracle).unwrap().max_distance < 1e-10);
    }

    #[test]
    fn ep_values() {
        assert_eq!(exceptional_point(1), 1.0);
        assert!((exceptional_point(2) - 1.414214).abs() < 1e-6);
        assert!((exceptional_point(6) - 1.154701).abs() < 1e-6);
    }

    #[test]
    fn roots_match_oracle_on_both_sides() {
        for n in 1..=12 {
            let ep = exceptional_point(n);
            for g in [0.05, 0.4, 0.9 * ep, ep - 1e-3, ep + 1e-3, 1.3 * ep, 3.0, 20.0] {
                let roots = solve_secular(n, g).unwrap();
                // Far above the EP real roots crowd the poles of f, where a
                // last-bit error in k already moves f by ~1e-12 relative.
                let tol = if g > 3.0 { 1e-10 } else { 1e-12 };
                for r in &roots {
                    assert!(root_residual(n, g, r) < tol, "N={n} g={g} {r:?}");
                }
                let ours: Vec<_> = roots.iter().map(|r| r.energy).collect();
                let oracle = eigenvalues(&ChainSpec::scaled_uniform(n, g).unwrap().eigenpairs().unwrap());
                let m = match_spectra(&ours, &oracle).unwrap();
                assert!(m.max_distance < 1e-9, "N={n} g={g}: {}", m.max_distance);
            }
        }
    }

    #[test]
    fn exceptional_root_inside_window() {
        let roots = solve_secular(5, 1.0).unwrap();
        let last = roots.last().unwrap();
        assert_eq!(last.phase, Phase::Exceptional);
        assert_eq!(last.multiplicity, 2);
        let roots = solve_secular(4, exceptional_point(4)).unwrap();
        assert_eq!(
            roots
                .iter()
                .find(|r| r.phase == Phase::Exceptional)
                .unwrap()
                .multiplicity,
            3
        );
        assert!(roots.iter().all(|r| r.phase != Phase::ZeroMode));
    }

    #[test]
    fn broken_below_ep_is_rejected() {
        assert!(matches!(solve_secular_broken(3, 0.9), Err(Error::Phase { .. })));
        assert!(matches!(solve_secular_broken(4, 1.2), Err(Error::Phase { .. })));
    }

    #[test]
    fn kappa_tends_to_log_gamma() {
        let mut prev = f64::INFINITY;
        for g in [1.1, 5.0, 20.0, 50.0] {
            let kappa = solve_secular_broken(9, g).unwrap()[0].kappa;
            let d = broken_log_offset(9, kappa);
            assert!(((kappa - f64::ln(g)) - d).abs() < 1e-12);
            assert!(d > 0.0 && d < prev);
            prev = d;
        }
        assert!(prev < 0.05);
        for n in [2, 8] {
            let kappa = solve_secular_broken(n, 3.0).unwrap()[0].kappa;
            assert!(((kappa - f64::ln(3.0)) - broken_log_offset(n, kappa)).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenfunctions_are_normalized_eigenvectors() {
        for n in 1..=9 {
            for g in [0.3, 0.8 * exceptional_point(n), 1.5 * exceptional_point(n)] {
                let chain = ChainSpec::scaled_uniform(n, g).unwrap().matrix();
                for r in solve_secular(n, g).unwrap() {
                    let f = eigenfunction(&r, n, g).unwrap();
                    assert!((f.norm() - 1.0).abs() < 1e-12);
                    assert!(residual(&chain, r.energy, &f.values) < 1e-10);
                    if r.phase == Phase::PtUnbroken || r.phase == Phase::ZeroMode {
                        let raw = raw_eigenfunction(n, g, r.k);
                        let sq: f64 = raw.iter().map(|x| x.norm_sqr()).sum();
                        assert!((sq - real_norm_squared(n, g)).abs() < 1e-10 * sq);
                        for l in 0..=n {
                            assert!((f.values[l].norm() - f.values[n - l].norm()).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn hyperbolic_form_is_parallel() {
        for n in [3, 4, 9] {
            let g = 1.2 * exceptional_point(n);
            for r in solve_secular_broken(n, g).unwrap() {
                let a = raw_eigenfunction(n, g, r.k);
                let b = broken_branch_form(n, g, r.kappa, r.phase == Phase::PtBrokenPlus);
                let na: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                let o = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm();
                assert!((o / (na * nb) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ep_closed_forms() {
        let roots = solve_secular(9, 1.0).unwrap();
        let f = eigenfunction(roots.last().unwrap(), 9, 1.0).unwrap();
        for v in &f.values {
            assert!((v.norm_sqr() - 0.1).abs() < 1e-14);
        }
        let g = exceptional_point(8);
        let roots = solve_secular(8, g).unwrap();
        let f = eigenfunction(roots.last().unwrap(), 8, g).unwrap();
        for (l, v) in f.values.iter().enumerate() {
            let want = if l % 2 == 0 {
                1.0 / 10f64.sqrt()
            } else {
                1.0 / 8f64.sqrt()
            };
            assert!((v.norm() - want).abs() < 1e-14);
        }
    }

    #[test]
    fn inconsistent_root_is_rejected() {
        let r = solve_secular(3, 0.5).unwrap()[0];
        assert!(matches!(eigenfunction(&r, 3, 0.7), Err(Error::InconsistentRoot(_))));
    }

    #[test]
    fn pt_checks() {
        let uniform = ChainSpec::scaled_uniform(5, 0.7).unwrap().matrix();
        let r = check_pt_symmetry(&uniform, 1e-14).unwrap();
        assert!(r.symmetric);
        assert!(r.classes.iter().all(|(_, unbroken)| *unbroken));
        let broken = check_pt_symmetry(&ChainSpec::scaled_uniform(5, 1.5).unwrap().matrix(), 1e-14).unwrap();
        assert_eq!(broken.classes.iter().filter(|(_, u)| !u).count(), 2);
        let diag = SparseComplexMatrix::from_triplets(2, [(0, 0, c(1.0, 0.0)), (1, 1, c(2.0, 0.0))]).unwrap();
        assert!(!check_pt_symmetry(&diag, 1e-12).unwrap().symmetric);
    }

    #[test]
    fn chain_spectrum_is_contained_in_tree_spectrum() {
        let spec = TreeSpec::uniform(3, 2, 0.4).unwrap();
        let index = build_index(&spec).unwrap();
        let h = assemble_hamiltonian(&spec, &index).unwrap();
        let tree = eigenvalues(&eig_dense(&h).unwrap());
        for s in extended_states(&spec, &index).unwrap() {
            let e = s.chain_pair.value;
            assert!(tree.iter().any(|t| (t - e).norm() < 1e-9));
            assert!(residual(&h, e, &s.full_vector) < 1e-9);
        }
    }

    #[test]
    fn roots_csv_header() {
        let rows = vec![(0.5, solve_secular(2, 0.5).unwrap())];
        let mut buf = Vec::new();
        write_roots_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("gamma_tilde,k_re,k_im,E_re,E_im,phase\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
