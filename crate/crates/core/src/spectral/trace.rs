use std::io::Write;

use num_complex::Complex64;

use super::{eig_dense, EigenPair};
use crate::error::{Error, Result};
use crate::sparse::SparseComplexMatrix;

/// Steps whose weakest matched overlap falls below this are flagged.
pub const RELIABLE_OVERLAP: f64 = 0.5;

/// Eigenvalues closer than this (relative) are treated as one degenerate
/// cluster when scoring overlaps.
const CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    /// `assignment[b]` is the index, in the sorted eigenpairs of the next grid
    /// point, that continues branch `b`.
    pub assignment: Vec<usize>,
    pub min_overlap: f64,
    pub reliable: bool,
}

/// Eigenpairs along an ascending parameter grid, reordered so that
/// `branches(g)[b]` follows one trajectory `b` through the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    grid: Vec<f64>,
    points: Vec<Vec<EigenPair>>,
    steps: Vec<TraceStep>,
}

impl SpectrumTrace {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn branch_count(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// Eigenpairs at grid point `g`, indexed by branch.
    pub fn branches(&self, g: usize) -> &[EigenPair] {
        &self.points[g]
    }

    pub fn steps(&self) -> &[TraceStep] {
        &self.steps
    }

    /// Eigenvalue trajectory of branch `b` over the grid.
    pub fn trajectory(&self, b: usize) -> Vec<Complex64> {
        self.points.iter().map(|p| p[b].value).collect()
    }

    /// Whether the step arriving at grid point `g` was reliable (the first
    /// point always is).
    pub fn reliable_at(&self, g: usize) -> bool {
        g == 0 || self.steps[g - 1].reliable
    }

    pub fn unreliable_steps(&self) -> Vec<usize> {
        self.steps
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.reliable)
            .map(|(i, _)| i)
            .collect()
    }

    /// CSV with columns `gamma_tilde,branch_id,re_E,im_E,tracking_reliable`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["gamma_tilde", "branch_id", "re_E", "im_E", "tracking_reliable"])?;
        for (g, &x) in self.grid.iter().enumerate() {
            let reliable = self.reliable_at(g);
            for (b, p) in self.points[g].iter().enumerate() {
                out.write_record([
                    format!("{x:.12e}"),
                    b.to_string(),
                    format!("{:.15e}", p.value.re),
                    format!("{:.15e}", p.value.im),
                    reliable.to_string(),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Tracks eigenvalues of `builder(γ̃)` along `grid` by maximal eigenvector
/// overlap between consecutive points.
pub fn continue_spectrum<F>(builder: F, grid: &[f64]) -> Result<SpectrumTrace>
where
    F: Fn(f64) -> Result<SparseComplexMatrix>,
{
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Config("spectrum trace grid must be strictly ascending".into()));
    }
    let mut points: Vec<Vec<EigenPair>> = Vec::with_capacity(grid.len());
    let mut steps = Vec::with_capacity(grid.len().saturating_sub(1));
    for &x in grid {
        let pairs = eig_dense(&builder(x)?)?;
        if let Some(prev) = points.last() {
            if prev.len() != pairs.len() {
                return Err(Error::DimensionMismatch {
                    expected: prev.len(),
                    got: pairs.len(),
                });
            }
            let step = match_step(prev, &pairs);
            let ordered = step.assignment.iter().map(|&j| pairs[j].clone()).collect();
            steps.push(step);
            points.push(ordered);
        } else {
            points.push(pairs);
        }
    }
    Ok(SpectrumTrace {
        grid: grid.to_vec(),
        points,
        steps,
    })
}

fn clusters(pairs: &[EigenPair]) -> Vec<usize> {
    // Pairs are sorted by (re, im), but near-equal values may interleave, so
    // compare against every earlier representative.
    let mut label = vec![usize::MAX; pairs.len()];
    let mut next = 0;
    for i in 0..pairs.len() {
        if label[i] != usize::MAX {
            continue;
        }
        label[i] = next;
        let scale = pairs[i].value.norm().max(1.0);
        for j in i + 1..pairs.len() {
            if label[j] == usize::MAX && (pairs[i].value - pairs[j].value).norm() <= CLUSTER_TOL * scale {
                label[j] = next;
            }
        }
        next += 1;
    }
    label
}

fn match_step(prev: &[EigenPair], next: &[EigenPair]) -> TraceStep {
    let n = prev.len();
    let raw: Vec<Vec<f64>> = prev
        .iter()
        .map(|a| {
            next.iter()
                .map(|b| {
                    a.vector
                        .iter()
                        .zip(&b.vector)
                        .map(|(x, y)| x.conj() * y)
                        .sum::<Complex64>()
                        .norm_sqr()
                })
                .collect()
        })
        .collect();

    // Degenerate clusters are scored by the mean squared projection of one
    // cluster's vectors onto the other's span.
    let ca = clusters(prev);
    let cb = clusters(next);
    let na = ca.iter().max().map_or(0, |m| m + 1);
    let nb = cb.iter().max().map_or(0, |m| m + 1);
    let mut block = vec![vec![0.0; nb]; na];
    let mut size_a = vec![0usize; na];
    for i in 0..n {
        size_a[ca[i]] += 1;
        for j in 0..n {
            block[ca[i]][cb[j]] += raw[i][j];
        }
    }
    let score: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (block[ca[i]][cb[j]] / size_a[ca[i]] as f64).min(1.0).sqrt())
                .collect()
        })
        .collect();

    let mut candidates: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    candidates.sort_by(|&(i1, j1), &(i2, j2)| {
        score[i2][j2]
            .total_cmp(&score[i1][j1])
            .then(i1.cmp(&i2))
            .then(j1.cmp(&j2))
    });
    let mut assignment = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    let mut left = n;
    for (i, j) in candidates {
        if left == 0 {
            break;
        }
        if assignment[i] == usize::MAX && !taken[j] {
            assignment[i] = j;
            taken[j] = true;
            left -= 1;
        }
    }

    // Pairwise exchange until no transposition improves the total overlap.
    let mut improved = true;
    let mut rounds = 0;
    while improved && rounds < 4 * n + 4 {
        improved = false;
        rounds += 1;
        for a in 0..n {
            for b in a + 1..n {
                let (ja, jb) = (assignment[a], assignment[b]);
                let now = score[a][ja] + score[b][jb];
                let swapped = score[a][jb] + score[b][ja];
                if swapped > now + 1e-12 {
                    assignment.swap(a, b);
                    improved = true;
                }
            }
        }
    }

    let min_overlap = (0..n).map(|i| score[i][assignment[i]]).fold(f64::INFINITY, f64::min);
    let min_overlap = if n == 0 { 1.0 } else { min_overlap };
    TraceStep {
        assignment,
        reliable: min_overlap >= RELIABLE_OVERLAP,
        min_overlap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dot(g: f64) -> Result<SparseComplexMatrix> {
        SparseComplexMatrix::from_triplets(
            2,
            [
                (0, 0, Complex64::new(0.0, -g)),
                (0, 1, Complex64::new(-1.0, 0.0)),
                (1, 0, Complex64::new(-1.0, 0.0)),
                (1, 1, Complex64::new(0.0, g)),
            ],
        )
    }

    #[test]
    fn constant_matrix_gives_identity_matching() {
        let m = SparseComplexMatrix::from_triplets(
            3,
            [
                (0, 0, Complex64::new(1.0, 0.0)),
                (1, 1, Complex64::new(2.0, 0.5)),
                (2, 2, Complex64::new(-1.0, 0.0)),
            ],
        )
        .unwrap();
        let trace = continue_spectrum(|_| Ok(m.clone()), &[0.0, 0.1, 0.2, 0.3]).unwrap();
        for s in trace.steps() {
            assert_eq!(s.assignment, vec![0, 1, 2]);
            assert!(s.reliable);
        }
    }

    #[test]
    fn dot_trajectories_meet_at_zero() {
        let grid: Vec<f64> = (0..=40).map(|i| 0.6 + 0.02 * i as f64).collect();
        let trace = continue_spectrum(dot, &grid).unwrap();
        let g1 = grid.iter().position(|&g| (g - 1.0).abs() < 1e-12).unwrap();
        let a = trace.trajectory(0);
        let b = trace.trajectory(1);
        assert!((a[g1] - b[g1]).norm() < 1e-6);
        assert!(a[g1].norm() < 1e-6);
        // Real below, imaginary above.
        assert!(a[0].im.abs() < 1e-12 && a[0].re.abs() > 0.5);
        assert!(a[40].re.abs() < 1e-12 && a[40].im.abs() > 0.5);
    }

    #[test]
    fn descending_grid_is_rejected() {
        assert!(continue_spectrum(dot, &[0.5, 0.4]).is_err());
    }

    #[test]
    fn csv_has_one_row_per_branch_and_point() {
        let trace = continue_spectrum(dot, &[0.2, 0.4]).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("gamma_tilde,branch_id,re_E,im_E,tracking_reliable"));
    }
}
