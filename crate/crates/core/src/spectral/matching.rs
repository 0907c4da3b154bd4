use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Bijective pairing between two equally sized spectra with minimal total
/// distance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumMatching {
    /// `assignment[i]` is the index in the second spectrum paired with `i`.
    pub assignment: Vec<usize>,
    pub max_distance: f64,
    pub total_distance: f64,
}

pub fn match_spectra(a: &[Complex64], b: &[Complex64]) -> Result<SpectrumMatching> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let cost: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| (x - y).norm()).collect()).collect();
    let assignment = min_cost_assignment(&cost);
    let distances: Vec<f64> = assignment.iter().enumerate().map(|(i, &j)| cost[i][j]).collect();
    Ok(SpectrumMatching {
        max_distance: distances.iter().copied().fold(0.0, f64::max),
        total_distance: distances.iter().sum(),
        assignment,
    })
}

/// Hungarian algorithm (potentials with shortest augmenting paths) on a
/// square cost matrix; returns the row-to-column assignment.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    // p[j]: row (1-based) assigned to column j; column 0 is a sentinel.
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if p[j] != 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_min(cost: &[Vec<f64>]) -> f64 {
        fn rec(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
            if row == cost.len() {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for j in 0..cost.len() {
                if !used[j] {
                    used[j] = true;
                    best = best.min(cost[row][j] + rec(cost, row + 1, used));
                    used[j] = false;
                }
            }
            best
        }
        rec(cost, 0, &mut vec![false; cost.len()])
    }

    #[test]
    fn hungarian_matches_brute_force() {
        let mut state = 12345u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for n in 1..=6 {
            for _ in 0..20 {
                let cost: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| next()).collect()).collect();
                let a = min_cost_assignment(&cost);
                let mut seen = a.clone();
                seen.sort_unstable();
                assert_eq!(seen, (0..n).collect::<Vec<_>>());
                let total: f64 = a.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
                assert!((total - brute_force_min(&cost)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spectra_with_multiplicity() {
        let a = [
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 2.0),
        ];
        let b = [
            Complex64::new(0.0, 2.0),
            Complex64::new(1.0, 1e-9),
            Complex64::new(1.0, 0.0),
        ];
        let m = match_spectra(&a, &b).unwrap();
        assert!(m.max_distance <= 1e-9);
        assert_eq!(m.assignment[2], 0);
    }
}
