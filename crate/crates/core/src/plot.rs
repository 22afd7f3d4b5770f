//! Minimal self-contained SVG charts.

use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 450.0;
const MARGIN: f64 = 60.0;
const PALETTE: &[&str] = &["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"];
const MAX_POINTS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub values: Vec<f64>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn frame(out: &mut String, title: &str, x_label: &str, y_label: &str, x: (f64, f64), y: (f64, f64)) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, esc(title));
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    let _ = writeln!(out, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(out, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = x.0 + t * (x.1 - x.0);
        let yv = y.0 + t * (y.1 - y.0);
        let px = x0 + t * (x1 - x0);
        let py = y0 - t * (y0 - y1);
        let _ = writeln!(out, r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, y0 + 16.0, fmt_tick(xv));
        let _ = writeln!(out, r#"<text x="{:.1}" y="{py:.1}" text-anchor="end">{}</text>"#, x0 - 6.0, fmt_tick(yv));
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 15.0, esc(x_label));
    let _ = writeln!(
        out,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        esc(y_label)
    );
}

fn fmt_tick(v: f64) -> String {
    if v.abs() >= 1000.0 || v == v.round() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// Line chart with one `<polyline>` per series. Long series are thinned to
/// at most 1,000 evenly spaced points (the last point is always kept).
pub fn line_chart(series: &[Series], title: &str, x_label: &str, y_label: &str) -> String {
    let len = series.iter().map(|s| s.values.len()).max().unwrap_or(0);
    let x = (0.0, len.saturating_sub(1).max(1) as f64);
    let y = bounds(series.iter().flat_map(|s| s.values.iter().copied()));
    let mut out = String::new();
    frame(&mut out, title, x_label, y_label, x, y);
    let sx = |i: f64| MARGIN + (i - x.0) / (x.1 - x.0) * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - (v - y.0) / (y.1 - y.0) * (HEIGHT - 2.0 * MARGIN);
    for (k, s) in series.iter().enumerate() {
        let n = s.values.len();
        let stride = n.div_ceil(MAX_POINTS).max(1);
        let mut points = String::new();
        let mut idx: Vec<usize> = (0..n).step_by(stride).collect();
        if n > 0 && idx.last() != Some(&(n - 1)) {
            idx.push(n - 1);
        }
        for i in idx {
            let _ = write!(points, "{:.2},{:.2} ", sx(i as f64), sy(s.values[i]));
        }
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.trim_end()
        );
        let ly = MARGIN + 16.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{ly:.1}" fill="{color}">{}</text>"#,
            WIDTH - MARGIN - 150.0,
            esc(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Grouped bar chart: one group per category, one bar per series.
pub fn bar_chart(categories: &[f64], series: &[Series], title: &str, x_label: &str, y_label: &str) -> String {
    let y = (0.0, bounds(series.iter().flat_map(|s| s.values.iter().copied())).1.max(1e-12));
    let mut out = String::new();
    let n = categories.len().max(1) as f64;
    frame(&mut out, title, x_label, y_label, (0.0, n), y);
    let group_w = (WIDTH - 2.0 * MARGIN) / n;
    let bar_w = group_w * 0.8 / series.len().max(1) as f64;
    let sy = |v: f64| (v - y.0) / (y.1 - y.0) * (HEIGHT - 2.0 * MARGIN);
    for (c, value) in categories.iter().enumerate() {
        let gx = MARGIN + c as f64 * group_w;
        for (k, s) in series.iter().enumerate() {
            let h = sy(s.values.get(c).copied().unwrap_or(0.0));
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{bar_w:.2}" height="{h:.2}" fill="{}"/>"#,
                gx + group_w * 0.1 + k as f64 * bar_w,
                HEIGHT - MARGIN - h,
                PALETTE[k % PALETTE.len()]
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            gx + group_w / 2.0,
            HEIGHT - MARGIN + 30.0,
            fmt_tick(*value)
        );
    }
    for (k, s) in series.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" fill="{}">{}</text>"#,
            WIDTH - MARGIN - 150.0,
            MARGIN + 16.0 * k as f64,
            PALETTE[k % PALETTE.len()],
            esc(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}
