//! Minimal native SVG line plots.

use std::fmt::Write;

const PANEL_W: f64 = 640.0;
const PANEL_H: f64 = 200.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 30.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#e5a800", "#2ca02c", "#9467bd", "#8c564b"];

pub struct Series<'a> {
    pub label: &'a str,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

pub struct Panel<'a> {
    pub title: &'a str,
    pub series: Vec<Series<'a>>,
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-12 * lo.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1e-12);
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

/// Stacked panels sharing one legend.
pub fn render(panels: &[Panel<'_>]) -> String {
    let height = PANEL_H * panels.len() as f64 + 30.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PANEL_W}" height="{height}" viewBox="0 0 {PANEL_W} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (p, panel) in panels.iter().enumerate() {
        let top = p as f64 * PANEL_H;
        let (x0, x1) = bounds(panel.series.iter().flat_map(|s| s.x.iter().copied()));
        let (y0, y1) = bounds(panel.series.iter().flat_map(|s| s.y.iter().copied()));
        let w = PANEL_W - MARGIN_L - MARGIN_R;
        let h = PANEL_H - MARGIN_T - MARGIN_B;
        let px = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * w;
        let py = |y: f64| top + MARGIN_T + (1.0 - (y - y0) / (y1 - y0)) * h;
        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN_L}" y="{:.2}" width="{w}" height="{h}" fill="none" stroke="black"/>"#,
            top + MARGIN_T
        );
        let _ = writeln!(out, r#"<text x="{MARGIN_L}" y="{:.2}">{}</text>"#, top + MARGIN_T - 8.0, panel.title);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{y1:.6}</text>"#,
            MARGIN_L - 4.0,
            top + MARGIN_T + 10.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{y0:.6}</text>"#,
            MARGIN_L - 4.0,
            top + MARGIN_T + h
        );
        let _ = writeln!(out, r#"<text x="{MARGIN_L}" y="{:.2}">{x0}</text>"#, top + MARGIN_T + h + 14.0);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{x1}</text>"#,
            MARGIN_L + w,
            top + MARGIN_T + h + 14.0
        );
        for (i, s) in panel.series.iter().enumerate() {
            let points: Vec<String> = s
                .x
                .iter()
                .zip(&s.y)
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                PALETTE[i % PALETTE.len()],
                points.join(" ")
            );
        }
    }
    if let Some(first) = panels.first() {
        let y = height - 10.0;
        for (i, s) in first.series.iter().enumerate() {
            let x = MARGIN_L + 150.0 * i as f64;
            let _ = writeln!(
                out,
                r#"<line x1="{x}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="2"/><text x="{:.2}" y="{y}">{}</text>"#,
                y - 4.0,
                x + 20.0,
                y - 4.0,
                PALETTE[i % PALETTE.len()],
                x + 24.0,
                s.label
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
