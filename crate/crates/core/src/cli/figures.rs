//! Data behind each published figure, with a quick SVG and a legend.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use super::formats::{self, Schema};
use super::svg::{Mark, Plot, Series, BLUE, GREEN, GREY, ORANGE, RED};
use crate::chain::{eigenfunction, secular_f, solve_secular, ChainSpec, Phase};
use crate::error::{Error, Result};
use crate::random::{
    analyze_sample, ensemble_landmarks, sample_chain, sample_trace, write_aggregates_csv, write_samples_csv,
    EnsembleStats, RandomChainSpec, SampleSummary, Sampling,
};
use crate::spectral::SpectrumTrace;
use crate::transport::{average_current, uniform_current_sweep, write_profiles_csv, CurrentProfile};

pub const FIGURES: &[&str] = &[
    "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12", "fig13", "fig14", "fig15", "fig16",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureOptions {
    pub seed: u64,
    /// Samples per `δ` for the ensemble figures.
    pub samples: usize,
    pub plot: bool,
}

impl Default for FigureOptions {
    fn default() -> Self {
        Self {
            seed: super::config::DEFAULT_SEED,
            samples: 200,
            plot: true,
        }
    }
}

struct Table {
    file: String,
    schema: Schema,
    bytes: Vec<u8>,
}

/// Everything one figure writes.
pub struct Figure {
    name: String,
    tables: Vec<Table>,
    plots: Vec<(String, Plot)>,
    legend: String,
}

impl Figure {
    fn new(name: &str, legend: &str) -> Self {
        Self {
            name: name.to_string(),
            tables: Vec::new(),
            plots: Vec::new(),
            legend: legend.to_string(),
        }
    }

    fn table<F>(&mut self, suffix: &str, schema: Schema, render: F) -> Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<()>,
    {
        let mut bytes = Vec::new();
        render(&mut bytes)?;
        formats::validate(&schema, &bytes)?;
        self.tables.push(Table {
            file: format!("{}{suffix}.csv", self.name),
            schema,
            bytes,
        });
        Ok(())
    }

    fn plot(&mut self, suffix: &str, plot: Plot) {
        self.plots.push((format!("{}{suffix}.svg", self.name), plot));
    }

    /// Writes tables, the legend and (if `plot`) the SVGs; returns the file
    /// names written.
    pub fn write(&self, dir: &Path, plot: bool) -> Result<Vec<String>> {
        let mut written = Vec::new();
        for t in &self.tables {
            formats::write_table(&dir.join(&t.file), &t.schema, |w| {
                w.extend_from_slice(&t.bytes);
                Ok(())
            })?;
            written.push(t.file.clone());
        }
        let legend = format!("{}_legend.txt", self.name);
        std::fs::write(dir.join(&legend), &self.legend)?;
        written.push(legend);
        if plot {
            for (file, p) in &self.plots {
                std::fs::write(dir.join(file), p.render())?;
                written.push(file.clone());
            }
        }
        Ok(written)
    }

    pub fn table_bytes(&self, file: &str) -> Option<&[u8]> {
        self.tables.iter().find(|t| t.file == file).map(|t| t.bytes.as_slice())
    }
}

const COLORS: &str = "Colors: blue = real part, red = imaginary part.\n";

fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

fn g12(x: f64) -> String {
    format!("{x:.12e}")
}

fn g15(x: f64) -> String {
    format!("{x:.15e}")
}

fn csv_rows<W: Write>(w: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for r in rows {
        out.write_record(r)?;
    }
    out.flush()?;
    Ok(())
}

fn header(schema: &Schema) -> Vec<&'static str> {
    schema.columns.iter().map(|c| c.0).collect()
}

fn re_im_plot(title: String, x_label: &str, y_label: &str, pts: &[(f64, Complex64)], mark: Mark) -> Plot {
    let mut p = Plot::new(title, x_label, y_label);
    p.push(Series::new(
        "real part",
        BLUE,
        mark,
        pts.iter().map(|(x, z)| (*x, z.re)).collect(),
    ));
    p.push(Series::new(
        "imaginary part",
        RED,
        mark,
        pts.iter().map(|(x, z)| (*x, z.im)).collect(),
    ));
    p
}

/// Eigenvalues of the three-site branch Hamiltonian against `γ_N`.
fn fig4() -> Result<Figure> {
    let mut fig = Figure::new(
        "fig4",
        &format!(
            "{COLORS}Eigenvalues of the three-site branch block with n_(N-1) = n_N = n against gamma_N, one panel per n.\n\
             root_id orders the eigenvalues by imaginary part.\n"
        ),
    );
    let gammas = grid(0.0, 10.0, 201);
    let mut rows = Vec::new();
    for n in [2usize, 5, 8, 11] {
        let t = (n as f64).sqrt();
        let mut pts = Vec::new();
        for &g in &gammas {
            let mut values: Vec<Complex64> = ChainSpec::new(vec![t, t], 0.0, g)?
                .eigenpairs()?
                .into_iter()
                .map(|p| p.value)
                .collect();
            values.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
            for (i, e) in values.iter().enumerate() {
                rows.push(vec![n.to_string(), g12(g), i.to_string(), g15(e.re), g15(e.im)]);
                pts.push((g, *e));
            }
        }
        fig.plot(
            &format!("_n{n}"),
            re_im_plot(format!("n = {n}"), "gamma_N", "E", &pts, Mark::Dot),
        );
    }
    fig.table("", formats::SUBBRANCH, |w| {
        csv_rows(w, &header(&formats::SUBBRANCH), rows)
    })?;
    Ok(fig)
}

/// `f(k)` for `N = 1..6`.
fn fig5() -> Result<Figure> {
    let mut fig = Figure::new(
        "fig5",
        "f(k) = -sin((N+2)k)/sin(Nk) on (0, pi), one panel per N. Roots of f(k) = gamma_tilde^2 are the chain wave numbers.\n\
         Points at poles of f are present in the CSV; the plot clips to [-10, 10].\n",
    );
    let ks: Vec<f64> = (1..600).map(|i| std::f64::consts::PI * i as f64 / 600.0).collect();
    let mut rows = Vec::new();
    for n in 1..=6usize {
        let mut pts = Vec::new();
        for &k in &ks {
            let f = secular_f(n, k);
            rows.push(vec![n.to_string(), g15(k), g15(f)]);
            pts.push((k, f));
        }
        let mut p = Plot::new(format!("N = {n}"), "k", "f(k)");
        p.y_range = Some((-10.0, 10.0));
        p.push(Series::new("f(k)", BLUE, Mark::Line, pts));
        fig.plot(&format!("_N{n}"), p);
    }
    fig.table("", formats::SECULAR_F, |w| {
        csv_rows(w, &header(&formats::SECULAR_F), rows)
    })?;
    Ok(fig)
}

fn roots_table(fig: &mut Figure, gammas: &[f64]) -> Result<Vec<(usize, Vec<(f64, Complex64, Complex64)>)>> {
    let mut rows = Vec::new();
    let mut per_n = Vec::new();
    for n in 1..=6usize {
        let mut pts = Vec::new();
        for &g in gammas {
            for r in solve_secular(n, g)? {
                rows.push(vec![
                    n.to_string(),
                    g12(g),
                    g15(r.k.re),
                    g15(r.k.im),
                    g15(r.energy.re),
                    g15(r.energy.im),
                    r.phase.as_str().to_string(),
                ]);
                pts.push((g, r.k, r.energy));
            }
        }
        per_n.push((n, pts));
    }
    fig.table("", formats::ROOTS_BY_N, |w| {
        csv_rows(w, &header(&formats::ROOTS_BY_N), rows)
    })?;
    Ok(per_n)
}

/// Wave numbers against `γ̃`.
fn fig6() -> Result<Figure> {
    let mut fig = Figure::new(
        "fig6",
        &format!("{COLORS}Secular-equation wave numbers k against gamma_tilde, one panel per N. Each root is listed once (no pi offset).\n"),
    );
    for (n, pts) in roots_table(&mut fig, &grid(0.01, 3.0, 300))? {
        let pts: Vec<(f64, Complex64)> = pts.iter().map(|p| (p.0, p.1)).collect();
        fig.plot(
            &format!("_N{n}"),
            re_im_plot(format!("N = {n}"), "gamma_tilde", "k", &pts, Mark::Dot),
        );
    }
    Ok(fig)
}

/// Scaled energies against `γ̃`.
fn fig7() -> Result<Figure> {
    let mut fig = Figure::new(
        "fig7",
        &format!("{COLORS}Scaled energies E = -2 cos k against gamma_tilde, one panel per N.\n"),
    );
    for (n, pts) in roots_table(&mut fig, &grid(0.01, 3.0, 300))? {
        let pts: Vec<(f64, Complex64)> = pts.iter().map(|p| (p.0, p.2)).collect();
        fig.plot(
            &format!("_N{n}"),
            re_im_plot(format!("N = {n}"), "gamma_tilde", "E", &pts, Mark::Dot),
        );
    }
    Ok(fig)
}

/// Eigenfunctions of the `N = 9` chain.
fn fig8() -> Result<Figure> {
    let mut fig = Figure::new(
        "fig8",
        &format!(
            "{COLORS}Normalized extended eigenfunctions of the N = 9 chain against ell at gamma_tilde = 0.8 (a) and 1.2 (b).\n\
             Panel d: ln|psi| of the two PT-broken states at gamma_tilde = 1.2 (blue: broken_plus, red: broken_minus).\n"
        ),
    );
    let n = 9;
    let mut rows = Vec::new();
    for (tag, g) in [("a", 0.8), ("b", 1.2)] {
        let mut p = Plot::new(format!("N = 9, gamma_tilde = {g}"), "ell", "psi");
        let mut d = Plot::new("N = 9, gamma_tilde = 1.2, broken states", "ell", "ln|psi|");
        for (i, root) in solve_secular(n, g)?.iter().enumerate() {
            let f = eigenfunction(root, n, g)?;
            let mut pts = Vec::new();
            for (l, v) in f.values.iter().enumerate() {
                rows.push(vec![
                    g12(g),
                    i.to_string(),
                    root.phase.as_str().to_string(),
                    l.to_string(),
                    g15(v.re),
                    g15(v.im),
                ]);
                pts.push((l as f64, *v));
            }
            p.push(Series::new(
                format!("state {i} real"),
                BLUE,
                Mark::Line,
                pts.iter().map(|(x, z)| (*x, z.re)).collect(),
            ));
            p.push(Series::new(
                format!("state {i} imag"),
                RED,
                Mark::Line,
                pts.iter().map(|(x, z)| (*x, z.im)).collect(),
            ));
            if matches!(root.phase, Phase::PtBrokenPlus | Phase::PtBrokenMinus) {
                let color = if root.phase == Phase::PtBrokenPlus { BLUE } else { RED };
                d.push(Series::new(
                    root.phase.as_str(),
                    color,
                    Mark::Circle,
                    pts.iter().map(|(x, z)| (*x, z.norm().ln())).collect(),
                ));
            }
        }
        fig.plot(&format!("_{tag}"), p);
        if tag == "b" {
            fig.plot("_d", d);
        }
    }
    fig.table("", formats::EIGENFUNCTIONS, |w| {
        csv_rows(w, &header(&formats::EIGENFUNCTIONS), rows)
    })?;
    Ok(fig)
}

/// Average currents of every extended state against `γ̃`.
fn fig9() -> Result<Figure> {
    let mut fig = Figure::new(
        "fig9",
        "Average current of every extended state against gamma_tilde, one panel per N.\n\
         Blue: real-k states; red: PT-broken states; grey: exceptional point.\n",
    );
    let gammas = grid(0.01, 3.0, 300);
    let mut rows = Vec::new();
    for n in 1..=6usize {
        let sweep = uniform_current_sweep(n, &gammas)?;
        let mut p = Plot::new(format!("N = {n}"), "gamma_tilde", "J_av");
        let mut by_color: [(Vec<(f64, f64)>, &'static str, &str); 3] = [
            (Vec::new(), BLUE, "real k"),
            (Vec::new(), RED, "broken"),
            (Vec::new(), GREY, "exceptional"),
        ];
        for r in &sweep {
            rows.push(vec![
                n.to_string(),
                g12(r.gamma_tilde),
                r.state_id.to_string(),
                r.phase.as_str().to_string(),
                g15(r.profile.average),
            ]);
            let slot = match r.phase {
                Phase::PtUnbroken | Phase::ZeroMode => 0,
                Phase::PtBrokenPlus | Phase::PtBrokenMinus => 1,
                Phase::Exceptional => 2,
            };
            by_color[slot].0.push((r.gamma_tilde, r.profile.average));
        }
        for (pts, color, label) in by_color {
            p.push(Series::new(label, color, Mark::Dot, pts));
        }
        fig.plot(&format!("_N{n}"), p);
    }
    fig.table("", formats::SWEEP_BY_N, |w| {
        csv_rows(w, &header(&formats::SWEEP_BY_N), rows)
    })?;
    Ok(fig)
}

/// Current profiles of the `N = 9` chain.
fn fig10() -> Result<Figure> {
    let mut fig = Figure::new(
        "fig10",
        "Link currents J(ell) of every extended state of the N = 9 chain at gamma_tilde = 0.8 (a) and 1.2 (b).\n\
         Blue: real-k states; red: PT-broken states.\n",
    );
    let mut all = Vec::new();
    for (tag, g) in [("a", 0.8), ("b", 1.2)] {
        let rows = uniform_current_sweep(9, &[g])?;
        let mut p = Plot::new(format!("N = 9, gamma_tilde = {g}"), "ell", "J");
        for r in &rows {
            let broken = matches!(r.phase, Phase::PtBrokenPlus | Phase::PtBrokenMinus);
            let pts = r
                .profile
                .values
                .iter()
                .enumerate()
                .map(|(l, j)| (l as f64, *j))
                .collect();
            p.push(Series::new(
                format!("state {}", r.state_id),
                if broken { RED } else { BLUE },
                Mark::Line,
                pts,
            ));
        }
        fig.plot(&format!("_{tag}"), p);
        all.extend(rows);
    }
    fig.table("", formats::PROFILES, |w| write_profiles_csv(&all, w))?;
    Ok(fig)
}

fn sample_spec(generations: usize, seed: u64) -> Result<RandomChainSpec> {
    RandomChainSpec::new(2.0, 0.1, generations, seed)
}

fn trace_figure(
    name: &str,
    generations: usize,
    opts: &FigureOptions,
) -> Result<(Figure, SampleSummary, SpectrumTrace)> {
    let spec = sample_spec(generations, opts.seed)?;
    let summary = analyze_sample(&spec, 0)?;
    let sample = sample_chain(&spec, 0)?;
    let trace = sample_trace(&sample, &spec.grid)?;
    let mut fig = Figure::new(
        name,
        &format!(
            "{COLORS}Tracked eigenvalues of random sample 0 (N = {generations}, delta = 0.1, seed {}) against gamma_tilde.\n\
             Exceptional point of this sample: gamma_tilde = {:.9}, E = {:.6}{:+.6}i.\n\
             Panel _ep: the complex plane at the exceptional point; the coalesced pair is drawn in red.\n",
            opts.seed, summary.gamma_ep, summary.ep_energy.re, summary.ep_energy.im
        ),
    );
    fig.table("", formats::TRACE, |w| trace.write_csv(w))?;
    let mut p = Plot::new(format!("N = {generations}, delta = 0.1, sample 0"), "gamma_tilde", "E");
    for b in 0..trace.branch_count() {
        let traj: Vec<(f64, Complex64)> = trace.grid().iter().copied().zip(trace.trajectory(b)).collect();
        p.push(Series::new(
            format!("branch {b} real"),
            BLUE,
            Mark::Line,
            traj.iter().map(|(x, z)| (*x, z.re)).collect(),
        ));
        p.push(Series::new(
            format!("branch {b} imag"),
            RED,
            Mark::Line,
            traj.iter().map(|(x, z)| (*x, z.im)).collect(),
        ));
    }
    fig.plot("", p);
    let at_ep: Vec<Complex64> = sample
        .with_gamma(summary.gamma_ep)
        .eigenpairs()?
        .into_iter()
        .map(|q| q.value)
        .collect();
    let mut c = Plot::new(format!("gamma_tilde = {:.6}", summary.gamma_ep), "Re E", "Im E");
    let near = |e: &Complex64| (e - summary.ep_energy).norm() < 1e-3;
    c.push(Series::new(
        "eigenvalues",
        BLUE,
        Mark::Circle,
        at_ep.iter().filter(|e| !near(e)).map(|e| (e.re, e.im)).collect(),
    ));
    c.push(Series::new(
        "coalesced pair",
        RED,
        Mark::Circle,
        at_ep.iter().filter(|e| near(e)).map(|e| (e.re, e.im)).collect(),
    ));
    fig.plot("_ep", c);
    Ok((fig, summary, trace))
}

fn currents_figure(name: &str, generations: usize, opts: &FigureOptions) -> Result<Figure> {
    let (_, summary, trace) = trace_figure(name, generations, opts)?;
    let mut fig = Figure::new(
        name,
        &format!(
            "Average current of each tracked eigenstate of random sample 0 (N = {generations}, delta = 0.1, seed {}).\n\
             Grey lines: branches. Red circle: exceptional point at gamma_tilde = {:.9}. Green square: maximum current {:.9} at gamma_tilde = {:.9}.\n",
            opts.seed, summary.gamma_ep, summary.max_j, summary.gamma_max_j
        ),
    );
    let mut rows = Vec::new();
    let mut lines = vec![Vec::new(); trace.branch_count()];
    for (g, &x) in trace.grid().iter().enumerate() {
        for (b, pair) in trace.branches(g).iter().enumerate() {
            let j = average_current(&pair.vector);
            rows.push(vec![g12(x), b.to_string(), g15(j)]);
            lines[b].push((x, j));
        }
    }
    fig.table("", formats::BRANCH_CURRENTS, |w| {
        csv_rows(w, &header(&formats::BRANCH_CURRENTS), rows)
    })?;
    let mut p = Plot::new(
        format!("N = {generations}, delta = 0.1, sample 0"),
        "gamma_tilde",
        "J_av",
    );
    for (b, pts) in lines.into_iter().enumerate() {
        p.push(Series::new(format!("branch {b}"), GREY, Mark::Line, pts));
    }
    let sample = sample_chain(&sample_spec(generations, opts.seed)?, 0)?;
    let ep_j = sample
        .with_gamma(summary.gamma_ep)
        .eigenpairs()?
        .iter()
        .map(|q| CurrentProfile::new(0, &q.vector).average)
        .fold(f64::NEG_INFINITY, f64::max);
    p.push(Series::new(
        "exceptional point",
        RED,
        Mark::Circle,
        vec![(summary.gamma_ep, ep_j)],
    ));
    p.push(Series::new(
        "maximum current",
        GREEN,
        Mark::Square,
        vec![(summary.gamma_max_j, summary.max_j)],
    ));
    fig.plot("", p);
    Ok(fig)
}

/// `δ` values of the ensemble figures.
pub fn ensemble_deltas() -> Vec<f64> {
    (1..=10).map(|i| 0.02 * i as f64).collect()
}

fn ensemble_figure(name: &str, generations: usize, opts: &FigureOptions) -> Result<(Figure, EnsembleStats)> {
    let spec = RandomChainSpec::new(2.0, 0.0, generations, opts.seed)?.with_sampling(Sampling::Antithetic);
    let stats = ensemble_landmarks(&spec, opts.samples, &ensemble_deltas())?;
    let odd = generations % 2 == 1;
    let mut fig = Figure::new(
        name,
        &format!(
            "Ensemble means against delta, N = {generations}, {} samples per delta in antithetic pairs, seed {}. Bars are the standard deviation of the distribution, not an error bar.\n\
             Blue circles: exceptional point.{} Green squares: maximum current.\n",
            opts.samples,
            opts.seed,
            if odd { " Orange triangles: zero eigenvalue." } else { "" }
        ),
    );
    fig.table("", formats::AGGREGATES, |w| write_aggregates_csv(&stats.per_delta, w))?;
    fig.table("_samples", formats::SAMPLES, |w| write_samples_csv(&stats.summaries, w))?;
    let mut p = Plot::new(format!("N = {generations}"), "delta", "gamma_tilde");
    let d = &stats.per_delta;
    p.push(
        Series::new(
            "exceptional point",
            BLUE,
            Mark::Circle,
            d.iter().map(|s| (s.delta, s.gamma_ep.mean)).collect(),
        )
        .with_bars(d.iter().map(|s| s.gamma_ep.std).collect()),
    );
    if odd {
        p.push(
            Series::new(
                "zero eigenvalue",
                ORANGE,
                Mark::Triangle,
                d.iter()
                    .map(|s| (s.delta, s.gamma_zero.map_or(f64::NAN, |z| z.mean)))
                    .collect(),
            )
            .with_bars(d.iter().map(|s| s.gamma_zero.map_or(0.0, |z| z.std)).collect()),
        );
    }
    p.push(
        Series::new(
            "maximum current",
            GREEN,
            Mark::Square,
            d.iter().map(|s| (s.delta, s.gamma_max_j.mean)).collect(),
        )
        .with_bars(d.iter().map(|s| s.gamma_max_j.std).collect()),
    );
    fig.plot("", p);
    Ok((fig, stats))
}

/// Builds a figure by name.
pub fn build_figure(name: &str, opts: &FigureOptions) -> Result<Figure> {
    match name {
        "fig4" => fig4(),
        "fig5" => fig5(),
        "fig6" => fig6(),
        "fig7" => fig7(),
        "fig8" => fig8(),
        "fig9" => fig9(),
        "fig10" => fig10(),
        "fig11" => trace_figure("fig11", 9, opts).map(|f| f.0),
        "fig12" => currents_figure("fig12", 9, opts),
        "fig13" => ensemble_figure("fig13", 9, opts).map(|f| f.0),
        "fig14" => trace_figure("fig14", 8, opts).map(|f| f.0),
        "fig15" => currents_figure("fig15", 8, opts),
        "fig16" => ensemble_figure("fig16", 8, opts).map(|f| f.0),
        other => Err(Error::Config(format!(
            "unknown figure {other:?}; expected one of {}",
            FIGURES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(fig: &Figure, file: &str) -> Vec<csv::StringRecord> {
        csv::Reader::from_reader(fig.table_bytes(file).unwrap())
            .records()
            .map(|r| r.unwrap())
            .collect()
    }

    #[test]
    fn fig7_n1_branches_meet_then_split() {
        let fig = fig7().unwrap();
        for r in rows(&fig, "fig7.csv").iter().filter(|r| &r[0] == "1") {
            let g: f64 = r[1].parse().unwrap();
            let (re, im): (f64, f64) = (r[4].parse().unwrap(), r[5].parse().unwrap());
            if g < 1.0 - 1e-6 {
                assert!(im.abs() < 1e-12 && (re.abs() - (1.0 - g * g).sqrt()).abs() < 1e-10);
            } else if g > 1.0 + 1e-6 {
                assert!(re.abs() < 1e-12 && (im.abs() - (g * g - 1.0).sqrt()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn fig9_n1_curve() {
        let fig = fig9().unwrap();
        for r in rows(&fig, "fig9.csv").iter().filter(|r| &r[0] == "1") {
            let g: f64 = r[1].parse().unwrap();
            let j: f64 = r[4].parse().unwrap();
            if (g - 1.0).abs() > 1e-6 {
                let expected = if g < 1.0 { g } else { 1.0 / g };
                assert!((j - expected).abs() < 1e-10, "g {g} j {j}");
            }
        }
    }

    #[test]
    fn fig4_imaginary_parts_nonnegative() {
        let fig = fig4().unwrap();
        assert!(rows(&fig, "fig4.csv")
            .iter()
            .all(|r| r[4].parse::<f64>().unwrap() >= -1e-12));
    }

    #[test]
    fn unknown_figure() {
        assert!(matches!(
            build_figure("fig3", &FigureOptions::default()),
            Err(Error::Config(_))
        ));
    }
}
