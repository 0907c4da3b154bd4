//! Dense non-Hermitian eigensolver oracle and spectral checks.
//!
//! Every analytical construction in the crate (localized families, the
//! effective chain, secular roots) is cross-checked against [`eig_dense`].

mod matching;
mod projection;
mod trace;

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sparse::SparseComplexMatrix;

pub use matching::{match_spectra, min_cost_assignment, SpectrumMatching};
pub use projection::{
    effective_hamiltonian_projection, effective_hamiltonian_projection_with_tol, resolvent_identity_gap, ProjectionPair,
};
pub use trace::{continue_spectrum, SpectrumTrace, TraceStep, RELIABLE_OVERLAP};

/// Default largest dimension handed to the dense solver.
pub const DEFAULT_DENSE_CAP: usize = 3000;
/// Default relative residual bound, scaled by `‖H‖_max · dim`.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-9;
/// Eigenvector overlap above which two eigenpairs count as coalesced.
pub const DEFECTIVE_OVERLAP: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigOptions {
    pub dense_cap: usize,
    pub residual_tol: f64,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self {
            dense_cap: DEFAULT_DENSE_CAP,
            residual_tol: DEFAULT_RESIDUAL_TOL,
        }
    }
}

/// Eigenvalue with a unit-norm right eigenvector and its residual
/// `‖Hv − Ev‖`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
    pub residual: f64,
}

pub fn eigenvalues(pairs: &[EigenPair]) -> Vec<Complex64> {
    pairs.iter().map(|p| p.value).collect()
}

/// All eigenpairs of `matrix`, sorted by real part then imaginary part.
pub fn eig_dense(matrix: &SparseComplexMatrix) -> Result<Vec<EigenPair>> {
    eig_dense_with(matrix, &EigOptions::default())
}

pub fn eig_dense_with(matrix: &SparseComplexMatrix, opts: &EigOptions) -> Result<Vec<EigenPair>> {
    if matrix.dim() > opts.dense_cap {
        return Err(Error::DenseCap {
            dim: matrix.dim(),
            cap: opts.dense_cap,
        });
    }
    eig_dense_mat(&matrix.to_dense(), opts).map_err(|e| match e {
        Error::NoConvergence { .. } => Error::NoConvergence {
            hash: matrix.content_hash(),
        },
        other => other,
    })
}

/// Dense-matrix entry point; see [`eig_dense`].
pub fn eig_dense_mat(h: &Mat<Complex64>, opts: &EigOptions) -> Result<Vec<EigenPair>> {
    let n = h.nrows();
    if n != h.ncols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: h.ncols(),
        });
    }
    if n > opts.dense_cap {
        return Err(Error::DenseCap {
            dim: n,
            cap: opts.dense_cap,
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![EigenPair {
            value: h[(0, 0)],
            vector: vec![Complex64::new(1.0, 0.0)],
            residual: 0.0,
        }]);
    }
    let evd = h.eigen().map_err(|_| Error::NoConvergence { hash: dense_hash(h) })?;
    let u = evd.U();
    let s = evd.S();
    let scale = max_abs(h).max(f64::MIN_POSITIVE);
    let bound = opts.residual_tol * scale * n as f64;

    let mut pairs = Vec::with_capacity(n);
    for j in 0..n {
        let value = s[j];
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::NoConvergence { hash: dense_hash(h) });
        }
        let mut vector: Vec<Complex64> = (0..n).map(|i| u[(i, j)]).collect();
        normalize(&mut vector);
        let residual = residual_norm(h, value, &vector);
        let mut pair = EigenPair {
            value,
            vector,
            residual,
        };
        if pair.residual > bound {
            refine(h, &mut pair, scale);
        }
        pairs.push(pair);
    }
    sort_pairs(&mut pairs);
    Ok(pairs)
}

/// Eigenvalues only, sorted like [`eig_dense`].
pub fn eigenvalues_dense(h: &Mat<Complex64>) -> Result<Vec<Complex64>> {
    let n = h.nrows();
    if n == 1 {
        return Ok(vec![h[(0, 0)]]);
    }
    let mut values = h
        .eigenvalues()
        .map_err(|_| Error::NoConvergence { hash: dense_hash(h) })?;
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(values)
}

fn sort_pairs(pairs: &mut [EigenPair]) {
    pairs.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
}

/// Inverse iteration with a slightly perturbed shift; keeps whichever
/// vector has the smaller residual.
fn refine(h: &Mat<Complex64>, pair: &mut EigenPair, scale: f64) {
    let n = h.nrows();
    let shift = pair.value + Complex64::new(1.0, 1.0) * (scale * 1e-12);
    let mut a = h.clone();
    for i in 0..n {
        a[(i, i)] -= shift;
    }
    let lu = a.partial_piv_lu();
    let mut v = pair.vector.clone();
    for _ in 0..3 {
        let rhs = Mat::<Complex64>::from_fn(n, 1, |i, _| v[i]);
        let x = lu.solve(&rhs);
        let mut next: Vec<Complex64> = (0..n).map(|i| x[(i, 0)]).collect();
        if !normalize(&mut next) {
            break;
        }
        // Rayleigh quotient for the refined vector.
        let hv = mat_vec(h, &next);
        let value: Complex64 = next.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum();
        let residual = residual_norm(h, value, &next);
        if residual < pair.residual {
            pair.value = value;
            pair.vector = next.clone();
            pair.residual = residual;
        }
        v = next;
    }
}

pub(crate) fn mat_vec(h: &Mat<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    let n = h.nrows();
    let mut out = vec![Complex64::default(); n];
    for j in 0..h.ncols() {
        let vj = v[j];
        if vj == Complex64::default() {
            continue;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o += h[(i, j)] * vj;
        }
    }
    out
}

fn residual_norm(h: &Mat<Complex64>, value: Complex64, v: &[Complex64]) -> f64 {
    mat_vec(h, v)
        .iter()
        .zip(v)
        .map(|(hv, x)| (hv - value * x).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Residual `‖Hv − Ev‖` for a sparse matrix.
pub fn residual(matrix: &SparseComplexMatrix, value: Complex64, v: &[Complex64]) -> f64 {
    matrix
        .mul_vec(v)
        .iter()
        .zip(v)
        .map(|(hv, x)| (hv - value * x).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn normalize(v: &mut [Complex64]) -> bool {
    let norm = vec_norm(v);
    if !(norm.is_finite() && norm > 0.0) {
        return false;
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    true
}

pub(crate) fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `|⟨a|b⟩|` for two vectors.
pub fn overlap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm()
}

fn max_abs(h: &Mat<Complex64>) -> f64 {
    let mut m: f64 = 0.0;
    for j in 0..h.ncols() {
        for i in 0..h.nrows() {
            m = m.max(h[(i, j)].norm());
        }
    }
    m
}

fn dense_hash(h: &Mat<Complex64>) -> u64 {
    SparseComplexMatrix::from_dense(h)
        .map(|s| s.content_hash())
        .unwrap_or_default()
}

/// Index pairs whose eigenvectors are nearly parallel (overlap above
/// [`DEFECTIVE_OVERLAP`]), i.e. numerically coalesced near an exceptional
/// point. Only pairs with eigenvalues closer than `value_tol` are compared.
pub fn near_defective_pairs(pairs: &[EigenPair], value_tol: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            if (pairs[i].value - pairs[j].value).norm() > value_tol {
                continue;
            }
            if overlap(&pairs[i].vector, &pairs[j].vector) > DEFECTIVE_OVERLAP {
                out.push((i, j));
            }
        }
    }
    out
}

/// Result of the reflection check `E ↦ −E*` (mirror about the imaginary axis).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub unmatched: Vec<Complex64>,
    /// Largest distance from any `E` to its nearest mirrored partner.
    pub max_mismatch: f64,
}

impl SymmetryReport {
    pub fn passed(&self) -> bool {
        self.unmatched.is_empty()
    }
}

/// Checks that every eigenvalue `E` has a partner `E'` with `|E' + E*| ≤ tol`.
pub fn check_spectrum_symmetry(values: &[Complex64], tol: f64) -> SymmetryReport {
    let mut unmatched = Vec::new();
    let mut max_mismatch: f64 = 0.0;
    for &e in values {
        let target = -e.conj();
        let best = values.iter().map(|x| (x - target).norm()).fold(f64::INFINITY, f64::min);
        max_mismatch = max_mismatch.max(best);
        if best > tol {
            unmatched.push(e);
        }
    }
    SymmetryReport {
        unmatched,
        max_mismatch,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImReport {
    pub violations: Vec<Complex64>,
    pub min_im: f64,
}

impl ImReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `Im E ≥ −tol` for every eigenvalue.
pub fn check_im_nonneg(values: &[Complex64], tol: f64) -> ImReport {
    let min_im = values.iter().map(|e| e.im).fold(f64::INFINITY, f64::min);
    ImReport {
        violations: values.iter().copied().filter(|e| e.im < -tol).collect(),
        min_im,
    }
}
