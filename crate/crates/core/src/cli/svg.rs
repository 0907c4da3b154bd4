//! Minimal SVG line and marker plots. The CSV next to each plot is the data
//! of record; these are for a quick look.

use std::fmt::Write as _;

pub const BLUE: &str = "#1f4fd1";
pub const RED: &str = "#d62728";
pub const ORANGE: &str = "#ff7f0e";
pub const GREEN: &str = "#2ca02c";
pub const GREY: &str = "#7f7f7f";

const W: f64 = 640.0;
const H: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mark {
    /// Polyline; a non-finite point breaks the line.
    Line,
    Dot,
    Circle,
    Triangle,
    Square,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub mark: Mark,
    pub points: Vec<(f64, f64)>,
    /// Symmetric vertical bars, one per point.
    pub bars: Option<Vec<f64>>,
}

impl Series {
    pub fn new(label: impl Into<String>, color: &'static str, mark: Mark, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            color,
            mark,
            points,
            bars: None,
        }
    }

    pub fn with_bars(mut self, bars: Vec<f64>) -> Self {
        self.bars = Some(bars);
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Fixed `(min, max)` for y; autoscaled when absent.
    pub y_range: Option<(f64, f64)>,
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let m = raw / mag;
    let f = if m < 1.5 {
        1.0
    } else if m < 3.5 {
        2.0
    } else if m < 7.5 {
        5.0
    } else {
        10.0
    };
    f * mag
}

fn label(v: f64, step: f64) -> String {
    let digits = (-step.log10().floor()).max(0.0) as usize;
    format!("{v:.digits$}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, s: Series) {
        self.series.push(s);
    }

    fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for s in &self.series {
            for (i, &(x, y)) in s.points.iter().enumerate() {
                if !(x.is_finite() && y.is_finite()) {
                    continue;
                }
                let b = s.bars.as_ref().map_or(0.0, |b| b[i]);
                x0 = x0.min(x);
                x1 = x1.max(x);
                y0 = y0.min(y - b);
                y1 = y1.max(y + b);
            }
        }
        if let Some(r) = self.y_range {
            (y0, y1) = r;
        }
        if !x0.is_finite() {
            (x0, x1) = (0.0, 1.0);
        }
        if !y0.is_finite() {
            (y0, y1) = (0.0, 1.0);
        }
        if x1 - x0 < 1e-12 {
            (x0, x1) = (x0 - 0.5, x1 + 0.5);
        }
        if y1 - y0 < 1e-12 {
            (y0, y1) = (y0 - 0.5, y1 + 0.5);
        }
        let pad = 0.04 * (y1 - y0);
        ((x0, x1), (y0 - pad, y1 + pad))
    }

    pub fn render(&self) -> String {
        let ((x0, x1), (y0, y1)) = self.bounds();
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;
        let inside = |x: f64, y: f64| x.is_finite() && y.is_finite() && y >= y0 && y <= y1;

        let mut o = String::new();
        let _ = writeln!(
            o,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(o, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            o,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            W / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            o,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );

        let xs = nice_step(x1 - x0);
        let mut t = (x0 / xs).ceil() * xs;
        while t <= x1 + 1e-9 * xs {
            let px = sx(t);
            let _ = writeln!(
                o,
                r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                TOP + ph,
                TOP + ph + 5.0,
                TOP + ph + 19.0,
                label(t, xs)
            );
            t += xs;
        }
        let ys = nice_step(y1 - y0);
        let mut t = (y0 / ys).ceil() * ys;
        while t <= y1 + 1e-9 * ys {
            let py = sy(t);
            let _ = writeln!(
                o,
                r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                LEFT - 5.0,
                LEFT - 8.0,
                py + 4.0,
                label(t, ys)
            );
            t += ys;
        }
        let _ = writeln!(
            o,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            H - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            o,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );

        for s in &self.series {
            let _ = writeln!(
                o,
                r#"<g stroke="{0}" fill="{0}"><title>{1}</title>"#,
                s.color,
                escape(&s.label)
            );
            if let Some(bars) = &s.bars {
                for (&(x, y), &b) in s.points.iter().zip(bars) {
                    if inside(x, y) {
                        let _ = writeln!(
                            o,
                            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}"/>"#,
                            sx(x),
                            sy((y + b).min(y1)),
                            sy((y - b).max(y0))
                        );
                    }
                }
            }
            match s.mark {
                Mark::Line => {
                    let mut run: Vec<String> = Vec::new();
                    let flush = |run: &mut Vec<String>, o: &mut String| {
                        if run.len() > 1 {
                            let _ = writeln!(
                                o,
                                r#"<polyline fill="none" stroke-width="1.5" points="{}"/>"#,
                                run.join(" ")
                            );
                        }
                        run.clear();
                    };
                    for &(x, y) in &s.points {
                        if inside(x, y) {
                            run.push(format!("{:.2},{:.2}", sx(x), sy(y)));
                        } else {
                            flush(&mut run, &mut o);
                        }
                    }
                    flush(&mut run, &mut o);
                }
                mark => {
                    for &(x, y) in s.points.iter().filter(|p| inside(p.0, p.1)) {
                        let (px, py) = (sx(x), sy(y));
                        let _ = match mark {
                            Mark::Dot => writeln!(o, r#"<circle cx="{px:.2}" cy="{py:.2}" r="1.3" stroke="none"/>"#),
                            Mark::Circle => writeln!(o, r#"<circle cx="{px:.2}" cy="{py:.2}" r="4"/>"#),
                            Mark::Square => writeln!(
                                o,
                                r#"<rect x="{:.2}" y="{:.2}" width="8" height="8"/>"#,
                                px - 4.0,
                                py - 4.0
                            ),
                            _ => writeln!(
                                o,
                                r#"<polygon points="{px:.2},{:.2} {:.2},{:.2} {:.2},{:.2}"/>"#,
                                py - 5.0,
                                px - 4.5,
                                py + 4.0,
                                px + 4.5,
                                py + 4.0
                            ),
                        };
                    }
                }
            }
            let _ = writeln!(o, "</g>");
        }
        o.push_str("</svg>\n");
        o
    }
}
