//! Transfer-matrix scattering through the two-site dot `(−iγ, +iγ)` between
//! ideal leads.

use std::io::Write;
use std::ops::Mul;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Energies closer than this to the band edges are rejected.
pub const EDGE_MARGIN: f64 = 1e-12;

/// Sweep endpoints are pulled this far inside the band.
pub const SWEEP_EDGE_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferMatrix2(pub [[Complex64; 2]; 2]);

impl TransferMatrix2 {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::default();
        Self([[one, zero], [zero, one]])
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn inverse(&self) -> Self {
        let m = &self.0;
        let d = self.det();
        Self([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]])
    }
}

impl Mul for TransferMatrix2 {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[Complex64::default(); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self(out)
    }
}

/// `((V − E, −1), (1, 0))`, mapping `(ψ_n, ψ_{n−1})` to `(ψ_{n+1}, ψ_n)`.
pub fn site_transfer(potential: Complex64, energy: f64) -> TransferMatrix2 {
    TransferMatrix2([
        [potential - energy, Complex64::new(-1.0, 0.0)],
        [Complex64::new(1.0, 0.0), Complex64::default()],
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatterConfig {
    pub gamma: f64,
    pub energy: f64,
    /// Ideal lead sites included on each side of the dot.
    pub lead_length: usize,
}

/// Wave number `k ∈ (0, π)` with `E = −2 cos k`.
pub fn wave_number(energy: f64) -> Result<f64> {
    if !(energy.abs() < 2.0 - EDGE_MARGIN) {
        return Err(Error::Grazing(energy));
    }
    Ok((-energy / 2.0).acos())
}

/// Total transfer matrix in the plane-wave basis, `Q⁻¹ M Q` with
/// `Q = ((1, 1), (e^{−ik}, e^{ik}))`.
pub fn plane_wave_transfer(config: &ScatterConfig) -> Result<TransferMatrix2> {
    let k = wave_number(config.energy)?;
    let e = config.energy;
    let lead = site_transfer(Complex64::default(), e);
    let mut m = TransferMatrix2::identity();
    for _ in 0..config.lead_length {
        m = lead * m;
    }
    m = site_transfer(Complex64::new(0.0, -config.gamma), e) * m;
    m = site_transfer(Complex64::new(0.0, config.gamma), e) * m;
    for _ in 0..config.lead_length {
        m = lead * m;
    }
    let q = TransferMatrix2([
        [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
        [Complex64::from_polar(1.0, -k), Complex64::from_polar(1.0, k)],
    ]);
    Ok(q.inverse() * m * q)
}

/// `T = 1/|𝓜₂₂|²`. Not clamped: gain can push `T` above one.
pub fn transmission(config: &ScatterConfig) -> Result<f64> {
    let m = plane_wave_transfer(config)?;
    Ok(1.0 / m.0[1][1].norm_sqr())
}

/// `[(1 − γ²/2)² + (γ²/(2 tan k))²]⁻¹`.
pub fn transmission_closed_form(energy: f64, gamma: f64) -> Result<f64> {
    let k = wave_number(energy)?;
    let g2 = gamma * gamma;
    let a = 1.0 - g2 / 2.0;
    let b = g2 / (2.0 * k.tan());
    Ok(1.0 / (a * a + b * b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatterRow {
    pub energy: f64,
    pub gamma: f64,
    pub t: f64,
    pub t_closed_form: f64,
}

/// `points` energies evenly spaced on `[e_min, e_max]` for each `γ`, after
/// clipping the range to `|E| ≤ 2 − SWEEP_EDGE_MARGIN`.
pub fn scatter_sweep(
    gammas: &[f64],
    e_min: f64,
    e_max: f64,
    points: usize,
    lead_length: usize,
) -> Result<Vec<ScatterRow>> {
    if points == 0 || !(e_min <= e_max) {
        return Err(Error::Config(format!(
            "energy range needs e_min <= e_max and at least one point (got [{e_min}, {e_max}], {points})"
        )));
    }
    let edge = 2.0 - SWEEP_EDGE_MARGIN;
    let (e_min, e_max) = (e_min.max(-edge), e_max.min(edge));
    if e_min > e_max {
        return Err(Error::Grazing(e_min));
    }
    let mut rows = Vec::with_capacity(gammas.len() * points);
    for &gamma in gammas {
        for i in 0..points {
            let energy = if points == 1 {
                e_min
            } else {
                e_min + (e_max - e_min) * i as f64 / (points - 1) as f64
            };
            rows.push(ScatterRow {
                energy,
                gamma,
                t: transmission(&ScatterConfig {
                    gamma,
                    energy,
                    lead_length,
                })?,
                t_closed_form: transmission_closed_form(energy, gamma)?,
            });
        }
    }
    Ok(rows)
}

/// `E,gamma,T,T_closed_form`.
pub fn write_scatter_csv<W: Write>(rows: &[ScatterRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["E", "gamma", "T", "T_closed_form"])?;
    for r in rows {
        out.write_record([
            format!("{:.12e}", r.energy),
            format!("{:.12e}", r.gamma),
            format!("{:.15e}", r.t),
            format!("{:.15e}", r.t_closed_form),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn t(gamma: f64, energy: f64, lead_length: usize) -> f64 {
        transmission(&ScatterConfig {
            gamma,
            energy,
            lead_length,
        })
        .unwrap()
    }

    #[test]
    fn site_matrices() {
        let m = site_transfer(c(0.0, 0.0), 0.0);
        assert_eq!(m.0, [[c(0.0, 0.0), c(-1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]);
        assert_eq!(m.det(), c(1.0, 0.0));
        let m = site_transfer(c(0.0, -0.7), 0.3);
        assert_eq!(m.0[0][0], c(-0.3, -0.7));
        assert!((m.det() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn free_chain_is_chebyshev() {
        // Trace of the L-fold free product is 2 cos(Lk) with E = −2 cos k.
        for &e in &[-1.5, -0.4, 0.0, 0.9, 1.7] {
            let kp = (-e / 2.0f64).acos();
            let mut m = TransferMatrix2::identity();
            for l in 1..=20 {
                m = site_transfer(c(0.0, 0.0), e) * m;
                assert!((m.trace() - c(2.0 * (l as f64 * kp).cos(), 0.0)).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn ballistic_and_e0_values() {
        for e in [-1.9, -0.5, 0.0, 1.2] {
            assert!((t(0.0, e, 3) - 1.0).abs() < 1e-12);
        }
        assert!((t(1.0, 0.0, 2) - 4.0).abs() < 1e-12);
        assert!(t(2f64.sqrt() - 1e-4, 0.0, 2) > 1e6);
        assert!(t(2f64.sqrt() + 1e-4, 0.0, 2) > 1e6);
    }

    #[test]
    fn closed_form_and_lead_independence() {
        for i in 0..10 {
            for j in 0..10 {
                let e = -1.9 + 3.8 * i as f64 / 9.0;
                let g = 0.1 + 0.3 * j as f64;
                let closed = transmission_closed_form(e, g).unwrap();
                let ts: Vec<f64> = [1, 5, 50].iter().map(|&l| t(g, e, l)).collect();
                assert!((ts[0] - closed).abs() <= 1e-12 * closed.max(1.0));
                assert!((ts[0] - ts[1]).abs() <= 1e-10 * closed.max(1.0));
                assert!((ts[0] - ts[2]).abs() <= 1e-10 * closed.max(1.0));
                let m = plane_wave_transfer(&ScatterConfig {
                    gamma: g,
                    energy: e,
                    lead_length: 5,
                })
                .unwrap();
                assert!((m.det() - c(1.0, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn grazing_rejected() {
        assert!(matches!(transmission_closed_form(2.0, 0.5), Err(Error::Grazing(_))));
        assert!(matches!(wave_number(-2.5), Err(Error::Grazing(_))));
    }

    #[test]
    fn symmetries() {
        for (e, g) in [(0.3, 0.8), (-1.1, 1.7), (1.6, 0.2)] {
            let a = t(g, e, 1);
            assert!((a - t(g, -e, 1)).abs() < 1e-12 * a);
            assert!((a - t(-g, e, 1)).abs() < 1e-12 * a);
        }
    }

    #[test]
    fn e0_monotone_each_side_of_root_two() {
        let below: Vec<f64> = (0..50).map(|i| 0.02 * i as f64).map(|g| t(g, 0.0, 1)).collect();
        assert!(below.windows(2).all(|w| w[1] > w[0]));
        let above: Vec<f64> = (0..50).map(|i| 1.42 + 0.05 * i as f64).map(|g| t(g, 0.0, 1)).collect();
        assert!(above.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn sweep_clips_band_edges() {
        let rows = scatter_sweep(&[0.3], -2.0, 2.0, 3, 1).unwrap();
        assert_eq!(rows[0].energy, -2.0 + SWEEP_EDGE_MARGIN);
        assert_eq!(rows[2].energy, 2.0 - SWEEP_EDGE_MARGIN);
        assert!(rows.iter().all(|r| r.t.is_finite()));
    }

    #[test]
    fn sweep_csv() {
        let rows = scatter_sweep(&[0.5, 1.0], -1.0, 1.0, 5, 2).unwrap();
        assert_eq!(rows.len(), 10);
        let mut buf = Vec::new();
        write_scatter_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("E,gamma,T,T_closed_form\n"));
    }
}
