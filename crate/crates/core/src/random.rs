//! Random-hopping chains: `n_ℓ = n(1 + Δ_ℓ)` with `Δ_ℓ` uniform in
//! `[−δ, δ]`, scaled by `1/√n` so the hoppings are `√(1 + Δ_ℓ)`.
//!
//! Per-sample streams: sample `id` under master seed `s` draws from
//! ChaCha8 seeded with `splitmix64(s ^ splitmix64(id + 0x9E37_79B9_7F4A_7C15))`.
//! Each `Δ_ℓ = δ·u_ℓ` with `u_ℓ` uniform in `[−1, 1)`, so one sample id gives
//! the same `u` for every `δ`.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::ChainSpec;
use crate::error::{Error, Result};
use crate::spectral::{continue_spectrum, eig_dense, EigenPair, SpectrumTrace};
use crate::transport::CurrentProfile;

/// Relative tolerance for counting an eigenvalue as lying on the imaginary
/// axis.
pub const AXIS_TOL: f64 = 1e-7;
/// Final bracket width of the landmark bisections.
pub const BISECT_WIDTH: f64 = 1e-13;
/// Resolution of the golden-section refinement of the current maximum.
pub const MAX_CURRENT_TOL: f64 = 1e-6;

/// How unit draws are assigned to sample ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Sampling {
    /// Every sample has its own stream.
    #[default]
    Independent,
    /// Samples `2m` and `2m + 1` use the draws `u` and `−u` of stream `m`.
    /// Each sample keeps the box distribution; the pair mean has no
    /// odd-order terms in `δ`.
    Antithetic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomChainSpec {
    pub n_base: f64,
    pub delta: f64,
    pub generations: usize,
    pub master_seed: u64,
    /// Ascending `γ̃` scan grid.
    pub grid: Vec<f64>,
    pub sampling: Sampling,
}

impl RandomChainSpec {
    pub fn new(n_base: f64, delta: f64, generations: usize, master_seed: u64) -> Result<Self> {
        let spec = Self {
            n_base,
            delta,
            generations,
            master_seed,
            grid: default_grid(),
            sampling: Sampling::Independent,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_grid(mut self, grid: Vec<f64>) -> Result<Self> {
        self.grid = grid;
        self.validate()?;
        Ok(self)
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        let mut s = self.clone();
        s.delta = delta;
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if !(self.n_base.is_finite() && self.n_base > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "base branching must be positive, got {}",
                self.n_base
            )));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::InvalidSpec(format!(
                "delta must lie in [0, 1), got {}",
                self.delta
            )));
        }
        if self.generations == 0 {
            return Err(Error::InvalidSpec("N must be at least 1".into()));
        }
        if self.grid.len() < 2 || self.grid.windows(2).any(|w| !(w[0] < w[1])) || self.grid[0] <= 0.0 {
            return Err(Error::InvalidSpec(
                "gamma grid must be positive and strictly ascending".into(),
            ));
        }
        Ok(())
    }
}

/// `γ̃ ∈ [0.5, 2.0]` in steps of `5·10⁻³`.
pub fn default_grid() -> Vec<f64> {
    (0..=300).map(|i| 0.5 + 0.005 * i as f64).collect()
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn sample_seed(master_seed: u64, sample_id: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(sample_id.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

/// Unit draws `u_ℓ ∈ [−1, 1)` for one sample.
pub fn sample_units(master_seed: u64, sample_id: u64, generations: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(master_seed, sample_id));
    (0..generations).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Scaled chain of one sample with hoppings `√(1 + Δ_ℓ)` and zero boundary
/// strengths (set them with [`ChainSpec::with_gamma`]).
pub fn sample_chain(spec: &RandomChainSpec, sample_id: u64) -> Result<ChainSpec> {
    let units = match spec.sampling {
        Sampling::Independent => sample_units(spec.master_seed, sample_id, spec.generations),
        Sampling::Antithetic => {
            let sign = if sample_id % 2 == 0 { 1.0 } else { -1.0 };
            sample_units(spec.master_seed, sample_id / 2, spec.generations)
                .into_iter()
                .map(|u| sign * u)
                .collect()
        }
    };
    let hoppings = units.into_iter().map(|u| (1.0 + spec.delta * u).sqrt()).collect();
    ChainSpec::new(hoppings, 0.0, 0.0)
}

fn on_axis(e: Complex64) -> bool {
    e.re.abs() <= AXIS_TOL * e.norm().max(1.0)
}

fn axis_count(pairs: &[EigenPair]) -> usize {
    pairs.iter().filter(|p| on_axis(p.value)).count()
}

fn pairs_at(sample: &ChainSpec, gamma: f64) -> Result<Vec<EigenPair>> {
    eig_dense(&sample.with_gamma(gamma).matrix())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExceptionalPoint {
    pub gamma: f64,
    /// Midpoint of the coalescing pair.
    pub energy: Complex64,
    /// Distance between the coalescing eigenvalues at `gamma`.
    pub gap: f64,
}

/// Closest pair of eigenvalues near the imaginary axis.
fn coalescing_pair(pairs: &[EigenPair]) -> (Complex64, f64) {
    let mut best = (Complex64::default(), f64::INFINITY);
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            let (a, b) = (pairs[i].value, pairs[j].value);
            let d = (a - b).norm();
            if d < best.1 && (a + b).re.abs() <= 1e-4 {
                best = ((a + b) / 2.0, d);
            }
        }
    }
    best
}

fn bisect_count(sample: &ChainSpec, mut lo: f64, mut hi: f64, base: usize) -> Result<(f64, f64)> {
    while hi - lo > BISECT_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if axis_count(&pairs_at(sample, mid)?) >= base + 2 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo, hi))
}

/// First `γ̃` in `bracket` where two more eigenvalues land on the imaginary
/// axis, scanned on `grid` and refined by bisection.
pub fn find_exceptional_point(sample: &ChainSpec, bracket: (f64, f64), grid: &[f64]) -> Result<ExceptionalPoint> {
    let (lo, hi) = bracket;
    let mut points: Vec<f64> = vec![lo];
    points.extend(grid.iter().copied().filter(|&g| g > lo && g < hi));
    points.push(hi);
    let counts: Vec<usize> = points
        .iter()
        .map(|&g| pairs_at(sample, g).map(|p| axis_count(&p)))
        .collect::<Result<_>>()?;
    find_ep_from_counts(sample, &points, &counts)
}

fn find_ep_from_counts(sample: &ChainSpec, points: &[f64], counts: &[usize]) -> Result<ExceptionalPoint> {
    let base = counts[0];
    let i = counts
        .windows(2)
        .position(|w| w[1] >= w[0] + 2)
        .ok_or(Error::NoCoalescence {
            lo: points[0],
            hi: *points.last().unwrap(),
        })?;
    let (lo, hi) = bisect_count(sample, points[i], points[i + 1], counts[i].max(base))?;
    let gamma = 0.5 * (lo + hi);
    let (energy, gap) = coalescing_pair(&pairs_at(sample, gamma)?);
    Ok(ExceptionalPoint { gamma, energy, gap })
}

/// Real part of `det H(γ̃)` for the scaled sample chain, from the
/// three-term continuant recursion.
pub fn chain_determinant(sample: &ChainSpec, gamma: f64) -> Complex64 {
    let t = sample.hoppings();
    let n = t.len();
    let diag = |l: usize| {
        if l == 0 {
            Complex64::new(0.0, -gamma)
        } else if l == n {
            Complex64::new(0.0, gamma)
        } else {
            Complex64::default()
        }
    };
    let mut prev = Complex64::new(1.0, 0.0);
    let mut cur = diag(0);
    for l in 1..=n {
        let next = diag(l) * cur - t[l - 1] * t[l - 1] * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `γ̃` where an eigenvalue passes through `E = 0`, for odd `N`. The
/// determinant is real there and changes sign at the crossing; `None` for
/// even `N` or when no sign change lies in `[from, to]`.
pub fn find_zero_crossing(sample: &ChainSpec, from: f64, to: f64) -> Option<f64> {
    if sample.generations() % 2 == 0 {
        return None;
    }
    let det = |g: f64| chain_determinant(sample, g).re;
    let (mut lo, mut hi) = (from, to);
    let (dlo, dhi) = (det(lo), det(hi));
    if dlo == 0.0 {
        return Some(lo);
    }
    if (dlo < 0.0) == (dhi < 0.0) {
        return None;
    }
    while hi - lo > BISECT_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let dm = det(mid);
        if dm == 0.0 {
            return Some(mid);
        }
        if (dm < 0.0) == (dlo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Zero-crossing location from `γ̃_z² = Π_{odd ℓ} t_ℓ² / Π_{even ℓ} t_ℓ²`
/// (links numbered from 1), the root of the odd-`N` determinant.
pub fn zero_crossing_closed_form(sample: &ChainSpec) -> Option<f64> {
    if sample.generations() % 2 == 0 {
        return None;
    }
    let mut num = 1.0;
    let mut den = 1.0;
    for (i, t) in sample.hoppings().iter().enumerate() {
        if i % 2 == 0 {
            num *= t * t;
        } else {
            den *= t * t;
        }
    }
    Some((num / den).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxCurrent {
    pub gamma: f64,
    pub value: f64,
    pub state_id: usize,
}

fn best_current(pairs: &[EigenPair]) -> (f64, usize) {
    pairs
        .iter()
        .enumerate()
        .map(|(i, p)| (CurrentProfile::new(i, &p.vector).average, i))
        .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a })
}

/// Maximum over `γ̃` and eigenstates of the average current.
pub fn find_max_current(sample: &ChainSpec, grid: &[f64]) -> Result<MaxCurrent> {
    let values: Vec<f64> = grid
        .iter()
        .map(|&g| pairs_at(sample, g).map(|p| best_current(&p).0))
        .collect::<Result<_>>()?;
    refine_max_current(sample, grid, &values)
}

fn refine_max_current(sample: &ChainSpec, grid: &[f64], values: &[f64]) -> Result<MaxCurrent> {
    let i = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > values[best] { i } else { best });
    let mut a = grid[i.saturating_sub(1)];
    let mut b = grid[(i + 1).min(grid.len() - 1)];
    let f = |g: f64| pairs_at(sample, g).map(|p| best_current(&p).0);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > MAX_CURRENT_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d)?;
        }
    }
    // Keep the grid value if refinement found nothing better.
    let mut gamma = 0.5 * (a + b);
    let pairs = pairs_at(sample, gamma)?;
    let (mut value, mut state_id) = best_current(&pairs);
    if values[i] > value {
        gamma = grid[i];
        (value, state_id) = best_current(&pairs_at(sample, gamma)?);
    }
    Ok(MaxCurrent { gamma, value, state_id })
}

/// Landmarks of one random sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSummary {
    pub sample_id: u64,
    pub delta: f64,
    pub gamma_ep: f64,
    pub ep_energy: Complex64,
    /// Sign of `Im E` at the coalescence (`0` at the origin).
    pub ep_side: i8,
    pub ep_gap: f64,
    pub gamma_zero: Option<f64>,
    pub gamma_max_j: f64,
    pub max_j: f64,
    pub max_j_state: usize,
}

/// Finds every landmark of one sample with one eigensolve per grid point.
pub fn analyze_sample(spec: &RandomChainSpec, sample_id: u64) -> Result<SampleSummary> {
    let sample = sample_chain(spec, sample_id)?;
    let grid = &spec.grid;
    let mut counts = Vec::with_capacity(grid.len());
    let mut best = Vec::with_capacity(grid.len());
    for &g in grid {
        let pairs = pairs_at(&sample, g)?;
        counts.push(axis_count(&pairs));
        best.push(best_current(&pairs).0);
    }
    let ep = find_ep_from_counts(&sample, grid, &counts)?;
    let gamma_zero = find_zero_crossing(&sample, grid[0], *grid.last().unwrap());
    let max = refine_max_current(&sample, grid, &best)?;
    let ep_side = if ep.energy.im.abs() <= 1e-9 {
        0
    } else if ep.energy.im > 0.0 {
        1
    } else {
        -1
    };
    Ok(SampleSummary {
        sample_id,
        delta: spec.delta,
        gamma_ep: ep.gamma,
        ep_energy: ep.energy,
        ep_side,
        ep_gap: ep.gap,
        gamma_zero,
        gamma_max_j: max.gamma,
        max_j: max.value,
        max_j_state: max.state_id,
    })
}

/// Spectrum trace of one sample over `grid` (for evolution plots).
pub fn sample_trace(sample: &ChainSpec, grid: &[f64]) -> Result<SpectrumTrace> {
    continue_spectrum(|g| Ok(sample.with_gamma(g).matrix()), grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (`n − 1`); the spread of the distribution.
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Self {
                count,
                mean: f64::NAN,
                std: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let std = if count > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { count, mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaStats {
    pub delta: f64,
    pub samples: usize,
    pub failures: usize,
    pub gamma_ep: Stat,
    pub gamma_zero: Option<Stat>,
    pub gamma_max_j: Stat,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub generations: usize,
    pub per_delta: Vec<DeltaStats>,
    pub summaries: Vec<SampleSummary>,
}

/// Runs `samples` samples for every `δ` in `delta_grid`. Samples run in
/// parallel; results are ordered by `(δ, sample_id)`.
pub fn ensemble_landmarks(spec: &RandomChainSpec, samples: usize, delta_grid: &[f64]) -> Result<EnsembleStats> {
    if samples < 2 {
        return Err(Error::InvalidSpec("an ensemble needs at least two samples".into()));
    }
    let mut per_delta = Vec::with_capacity(delta_grid.len());
    let mut summaries = Vec::new();
    for &delta in delta_grid {
        let s = spec.with_delta(delta)?;
        let results: Vec<Result<SampleSummary>> = (0..samples as u64)
            .into_par_iter()
            .map(|id| analyze_sample(&s, id))
            .collect();
        let ok: Vec<SampleSummary> = results.into_iter().filter_map(|r| r.ok()).collect();
        let failures = samples - ok.len();
        let eps: Vec<f64> = ok.iter().map(|r| r.gamma_ep).collect();
        let zeros: Vec<f64> = ok.iter().filter_map(|r| r.gamma_zero).collect();
        let maxes: Vec<f64> = ok.iter().map(|r| r.gamma_max_j).collect();
        per_delta.push(DeltaStats {
            delta,
            samples,
            failures,
            gamma_ep: Stat::of(&eps),
            gamma_zero: (spec.generations % 2 == 1).then(|| Stat::of(&zeros)),
            gamma_max_j: Stat::of(&maxes),
        });
        summaries.extend(ok);
    }
    Ok(EnsembleStats {
        generations: spec.generations,
        per_delta,
        summaries,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.12e}"))
}

/// Per-sample table.
pub fn write_samples_csv<W: Write>(rows: &[SampleSummary], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "delta",
        "sample_id",
        "gamma_ep",
        "E_ep_re",
        "E_ep_im",
        "ep_side",
        "ep_gap",
        "gamma_zero",
        "gamma_maxJ",
        "maxJ",
        "maxJ_state",
    ])?;
    for r in rows {
        out.write_record([
            format!("{}", r.delta),
            r.sample_id.to_string(),
            format!("{:.12e}", r.gamma_ep),
            format!("{:.12e}", r.ep_energy.re),
            format!("{:.12e}", r.ep_energy.im),
            r.ep_side.to_string(),
            format!("{:.6e}", r.ep_gap),
            opt(r.gamma_zero),
            format!("{:.12e}", r.gamma_max_j),
            format!("{:.12e}", r.max_j),
            r.max_j_state.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Per-`δ` aggregate table.
pub fn write_aggregates_csv<W: Write>(stats: &[DeltaStats], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "delta",
        "n_samples",
        "n_failed",
        "gamma_ep_mean",
        "gamma_ep_std",
        "gamma_zero_mean",
        "gamma_zero_std",
        "gamma_maxJ_mean",
        "gamma_maxJ_std",
    ])?;
    for s in stats {
        out.write_record([
            format!("{}", s.delta),
            s.samples.to_string(),
            s.failures.to_string(),
            format!("{:.12e}", s.gamma_ep.mean),
            format!("{:.12e}", s.gamma_ep.std),
            opt(s.gamma_zero.map(|z| z.mean)),
            opt(s.gamma_zero.map(|z| z.std)),
            format!("{:.12e}", s.gamma_max_j.mean),
            format!("{:.12e}", s.gamma_max_j.std),
        ])?;
    }
    out.flush()?;
    Ok(())
}
