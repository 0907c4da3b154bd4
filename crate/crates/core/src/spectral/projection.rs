use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;

use super::eigenvalues_dense;
use crate::error::{Error, Result};

/// Diagonal projector `P` onto a subset of basis sites and its complement
/// `Q = I − P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionPair {
    mask: Vec<bool>,
}

impl ProjectionPair {
    pub fn new(dim: usize, p_sites: &[usize]) -> Result<Self> {
        let mut mask = vec![false; dim];
        for &s in p_sites {
            if s >= dim {
                return Err(Error::OutOfRange(format!("site {s} in a {dim}-dimensional projector")));
            }
            mask[s] = true;
        }
        Ok(Self { mask })
    }

    pub fn dim(&self) -> usize {
        self.mask.len()
    }

    pub fn p_sites(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|&i| self.mask[i]).collect()
    }

    pub fn q_sites(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|&i| !self.mask[i]).collect()
    }

    pub fn p_matrix(&self) -> Mat<Complex64> {
        self.diag(true)
    }

    pub fn q_matrix(&self) -> Mat<Complex64> {
        self.diag(false)
    }

    fn diag(&self, on: bool) -> Mat<Complex64> {
        let n = self.dim();
        Mat::from_fn(n, n, |i, j| {
            if i == j && self.mask[i] == on {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::default()
            }
        })
    }
}

fn block(h: &Mat<Complex64>, rows: &[usize], cols: &[usize]) -> Mat<Complex64> {
    Mat::from_fn(rows.len(), cols.len(), |i, j| h[(rows[i], cols[j])])
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

/// `(z − A)⁻¹` by LU.
pub(crate) fn resolvent(a: &Mat<Complex64>, z: Complex64) -> Mat<Complex64> {
    let n = a.nrows();
    let mut m = Mat::from_fn(n, n, |i, j| -a[(i, j)]);
    for i in 0..n {
        m[(i, i)] += z;
    }
    let id = Mat::<Complex64>::identity(n, n);
    m.partial_piv_lu().solve(&id)
}

/// Effective Hamiltonian `PHP + PHQ (E − QHQ)⁻¹ QHP`, returned as a matrix
/// on the P sites (in ascending site order).
pub fn effective_hamiltonian_projection(
    h: &Mat<Complex64>,
    pair: &ProjectionPair,
    e: Complex64,
) -> Result<Mat<Complex64>> {
    let tol = 1e-10 * max_abs(h).max(1.0);
    effective_hamiltonian_projection_with_tol(h, pair, e, tol)
}

/// As [`effective_hamiltonian_projection`], rejecting `E` within `tol` of an
/// eigenvalue of `QHQ`.
pub fn effective_hamiltonian_projection_with_tol(
    h: &Mat<Complex64>,
    pair: &ProjectionPair,
    e: Complex64,
    tol: f64,
) -> Result<Mat<Complex64>> {
    if h.nrows() != pair.dim() || h.ncols() != pair.dim() {
        return Err(Error::DimensionMismatch {
            expected: pair.dim(),
            got: h.nrows(),
        });
    }
    let p = pair.p_sites();
    let q = pair.q_sites();
    let php = block(h, &p, &p);
    if q.is_empty() {
        return Ok(php);
    }
    let qhq = block(h, &q, &q);
    let distance = eigenvalues_dense(&qhq)?
        .iter()
        .map(|l| (e - l).norm())
        .fold(f64::INFINITY, f64::min);
    if distance <= tol {
        return Err(Error::NearSingular { distance });
    }
    let g = resolvent(&qhq, e);
    let phq = block(h, &p, &q);
    let qhp = block(h, &q, &p);
    Ok(&php + &phq * &g * &qhp)
}

/// Largest entrywise gap between `P(E − H)⁻¹P` and `(E − H_eff(E))⁻¹` on the
/// P sites.
pub fn resolvent_identity_gap(h: &Mat<Complex64>, pair: &ProjectionPair, e: Complex64) -> Result<f64> {
    let heff = effective_hamiltonian_projection(h, pair, e)?;
    let p = pair.p_sites();
    let full = resolvent(h, e);
    let lhs = block(&full, &p, &p);
    let rhs = resolvent(&heff, e);
    let mut gap: f64 = 0.0;
    for i in 0..p.len() {
        for j in 0..p.len() {
            gap = gap.max((lhs[(i, j)] - rhs[(i, j)]).norm());
        }
    }
    Ok(gap)
}
