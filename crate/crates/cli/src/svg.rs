//! Hand-written SVG charts. Output depends only on the input numbers, so
//! identical reports give identical bytes.

use std::fmt::Write as _;

use cgmt_core::experiments::CdfPoint;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const TICKS: usize = 5;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(mut x0: f64, mut x1: f64, y0: f64, y1: f64) -> Self {
        if x1.partial_cmp(&x0) != Some(std::cmp::Ordering::Greater) {
            x0 -= 0.5;
            x1 = x0 + 1.0;
        }
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="18" text-anchor="middle" font-size="14">{title}</text>"#,
        WIDTH / 2.0
    );
}

fn axes(out: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let (bx, by) = (f.px(f.x0), f.py(f.y0));
    let _ = writeln!(
        out,
        r#"<path d="M{bx:.1},{:.1} L{bx:.1},{by:.1} L{:.1},{by:.1}" fill="none" stroke="black"/>"#,
        f.py(f.y1),
        f.px(f.x1)
    );
    for i in 0..=TICKS {
        let t = i as f64 / TICKS as f64;
        let xv = f.x0 + t * (f.x1 - f.x0);
        let yv = f.y0 + t * (f.y1 - f.y0);
        let (x, y) = (f.px(xv), f.py(yv));
        let _ = writeln!(
            out,
            r#"<line x1="{x:.1}" y1="{by:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{xv:.3}</text>"#,
            by + 5.0,
            by + 18.0
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{y:.1}" x2="{bx:.1}" y2="{y:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{yv:.3}</text>"#,
            bx - 5.0,
            bx - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{xlabel}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        out,
        r#"<text x="15" y="{:.1}" text-anchor="middle" transform="rotate(-90 15 {:.1})">{ylabel}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
}

fn polyline(out: &mut String, f: &Frame, pts: impl Iterator<Item = (f64, f64)>, color: &str) {
    let coords: Vec<String> = pts.map(|(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
        coords.join(" ")
    );
}

fn legend(out: &mut String, entries: &[(&str, &str)]) {
    for (i, (label, color)) in entries.iter().enumerate() {
        let y = TOP + 10.0 + 16.0 * i as f64;
        let x = WIDTH - RIGHT - 150.0;
        let _ = writeln!(
            out,
            r#"<line x1="{x:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{label}</text>"#,
            x + 20.0,
            x + 26.0,
            y + 4.0
        );
    }
}

/// Primary and auxiliary empirical CDFs on a shared grid.
pub fn cdf_overlay(points: &[CdfPoint]) -> String {
    let mut out = String::new();
    open(&mut out, "Empirical CDF: primary vs auxiliary value");
    let x0 = points.first().map_or(0.0, |p| p.c);
    let x1 = points.last().map_or(1.0, |p| p.c);
    let f = Frame::new(x0, x1, 0.0, 1.0);
    axes(&mut out, &f, "c", "empirical CDF");
    polyline(&mut out, &f, points.iter().map(|p| (p.c, p.po_cdf)), "#1f77b4");
    polyline(&mut out, &f, points.iter().map(|p| (p.c, p.ao_cdf)), "#d62728");
    legend(&mut out, &[("primary P(Phi < c)", "#1f77b4"), ("auxiliary P(phi <= c)", "#d62728")]);
    out.push_str("</svg>\n");
    out
}

/// Histogram of per-trial NSE values with a vertical line at the prediction.
pub fn nse_histogram(values: &[f64], predicted: f64) -> String {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let mut lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if predicted.is_finite() {
        lo = lo.min(predicted);
        hi = hi.max(predicted);
    }
    if !lo.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    let bins = ((finite.len() as f64).sqrt().ceil() as usize).clamp(5, 40);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for v in &finite {
        let b = (((v - lo) / span) * bins as f64) as usize;
        counts[b.min(bins - 1)] += 1;
    }
    let top = counts.iter().copied().max().unwrap_or(0).max(1) as f64;

    let mut out = String::new();
    open(&mut out, "Empirical NSE with predicted value");
    let f = Frame::new(lo, lo + span, 0.0, top);
    axes(&mut out, &f, "||w_hat||^2 / sigma^2", "trials");
    let bw = span / bins as f64;
    for (i, &c) in counts.iter().enumerate() {
        let (xa, xb) = (f.px(lo + i as f64 * bw), f.px(lo + (i + 1) as f64 * bw));
        let (ya, yb) = (f.py(c as f64), f.py(0.0));
        let _ = writeln!(
            out,
            r##"<rect x="{xa:.2}" y="{ya:.2}" width="{:.2}" height="{:.2}" fill="#9ecae1" stroke="#3182bd"/>"##,
            xb - xa,
            yb - ya
        );
    }
    if predicted.is_finite() {
        let x = f.px(predicted);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#d62728" stroke-width="2" stroke-dasharray="6,4"/>"##,
            f.py(0.0),
            f.py(top)
        );
    }
    legend(&mut out, &[("trials", "#3182bd"), ("predicted NSE", "#d62728")]);
    out.push_str("</svg>\n");
    out
}
