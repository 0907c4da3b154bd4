//! Coordinate-format complex matrices.
//!
//! Assembly accepts arbitrary triplets, sums duplicates and drops exact
//! zeros, so every stored entry is nonzero and entries are kept sorted in
//! row-major order.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseComplexMatrix {
    dim: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseComplexMatrix {
    /// Square `dim × dim` matrix from `(row, col, value)` triplets.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let mut acc: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
        for (r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::OutOfRange(format!("entry ({r}, {c}) in a {dim}x{dim} matrix")));
            }
            *acc.entry((r, c)).or_default() += v;
        }
        let entries = acc
            .into_iter()
            .filter(|(_, v)| *v != Complex64::new(0.0, 0.0))
            .map(|((r, c), v)| (r, c, v))
            .collect();
        Ok(Self { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            entries: (0..dim).map(|i| (i, i, Complex64::new(1.0, 0.0))).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn off_diagonal_nnz(&self) -> usize {
        self.entries.iter().filter(|(r, c, _)| r != c).count()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries
            .binary_search_by(|(r, c, _)| (*r, *c).cmp(&(row, col)))
            .map(|i| self.entries[i].2)
            .unwrap_or_default()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|(_, _, v)| v.norm()).fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> Self {
        let mut entries: Vec<_> = self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect();
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        Self { dim: self.dim, entries }
    }

    pub fn adjoint(&self) -> Self {
        let mut t = self.transpose();
        for e in &mut t.entries {
            e.2 = e.2.conj();
        }
        t
    }

    /// Maximum entrywise distance to another matrix of the same dimension.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut acc: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
        for &(r, c, v) in &self.entries {
            *acc.entry((r, c)).or_default() += v;
        }
        for &(r, c, v) in &other.entries {
            *acc.entry((r, c)).or_default() -= v;
        }
        acc.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_transpose_symmetric(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.transpose()) <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.iter().filter(|(r, c, _)| r == c).map(|(_, _, v)| v).sum()
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "vector length must match dimension");
        let mut out = vec![Complex64::default(); self.dim];
        for &(r, c, a) in &self.entries {
            out[r] += a * v[c];
        }
        out
    }

    /// `⟨v|M|v⟩` with the Hermitian-conjugate bra.
    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        assert_eq!(v.len(), self.dim, "vector length must match dimension");
        self.entries.iter().map(|&(r, c, a)| v[r].conj() * a * v[c]).sum()
    }

    /// `wᵀ M v` with no conjugation (the left-eigenvector bra of a
    /// complex-symmetric Hamiltonian).
    pub fn bilinear(&self, w: &[Complex64], v: &[Complex64]) -> Complex64 {
        self.entries.iter().map(|&(r, c, a)| w[r] * a * v[c]).sum()
    }

    pub fn to_dense(&self) -> Mat<Complex64> {
        let mut m = Mat::<Complex64>::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] = v;
        }
        m
    }

    pub fn from_dense(m: &Mat<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let n = m.nrows();
        Self::from_triplets(
            n,
            (0..n)
                .flat_map(|r| (0..n).map(move |c| (r, c)))
                .map(|(r, c)| (r, c, m[(r, c)])),
        )
    }

    /// FNV-1a hash over dimension and entry bit patterns; used to identify
    /// matrices in solver diagnostics.
    pub fn content_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        feed(self.dim as u64);
        for &(r, c, v) in &self.entries {
            feed(r as u64);
            feed(c as u64);
            feed(v.re.to_bits());
            feed(v.im.to_bits());
        }
        h
    }

    /// Writes the matrix as coordinate text: a `# dim=<n> nnz=<m>` header
    /// followed by one `row col re im` line per stored entry.
    pub fn write_coordinate<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# dim={} nnz={}", self.dim, self.entries.len())?;
        for &(r, c, v) in &self.entries {
            writeln!(w, "{r} {c} {:.17e} {:.17e}", v.re, v.im)?;
        }
        Ok(())
    }

    pub fn read_coordinate<R: BufRead>(r: R) -> Result<Self> {
        let mut dim = None;
        let mut triplets = Vec::new();
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                for tok in header.split_whitespace() {
                    if let Some(d) = tok.strip_prefix("dim=") {
                        dim = Some(
                            d.parse::<usize>()
                                .map_err(|e| Error::Config(format!("bad dim in coordinate header: {e}")))?,
                        );
                    }
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(Error::Config(format!("malformed coordinate line: {line:?}")));
            }
            let parse_err =
                |e: &dyn std::fmt::Display| Error::Config(format!("malformed coordinate line {line:?}: {e}"));
            let r: usize = fields[0].parse().map_err(|e| parse_err(&e))?;
            let c: usize = fields[1].parse().map_err(|e| parse_err(&e))?;
            let re: f64 = fields[2].parse().map_err(|e| parse_err(&e))?;
            let im: f64 = fields[3].parse().map_err(|e| parse_err(&e))?;
            triplets.push((r, c, Complex64::new(re, im)));
        }
        let dim = dim.ok_or_else(|| Error::Config("missing `# dim=` header".into()))?;
        Self::from_triplets(dim, triplets)
    }
}
