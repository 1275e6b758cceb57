//! Minimal deterministic SVG rendering: heatmaps, mask overlays, line
//! plots, polar plots and bar charts.

use std::fmt::Write;

const VIRIDIS: [(u8, u8, u8); 10] = [
    (0x44, 0x01, 0x54),
    (0x48, 0x28, 0x78),
    (0x3e, 0x49, 0x89),
    (0x31, 0x68, 0x8e),
    (0x26, 0x82, 0x8e),
    (0x1f, 0x9e, 0x89),
    (0x35, 0xb7, 0x79),
    (0x6e, 0xce, 0x58),
    (0xb5, 0xde, 0x2b),
    (0xfd, 0xe7, 0x25),
];

/// Colour for `t ∈ [0, 1]`, piecewise-linear between viridis anchors.
pub fn viridis(t: f64) -> String {
    let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
    let x = t * (VIRIDIS.len() - 1) as f64;
    let k = (x.floor() as usize).min(VIRIDIS.len() - 2);
    let f = x - k as f64;
    let (a, b) = (VIRIDIS[k], VIRIDIS[k + 1]);
    let mix = |p: u8, q: u8| (p as f64 + f * (q as f64 - p as f64)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Categorical colours for overlaid series.
pub const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#17becf"];

const MARGIN_L: f64 = 70.0;
const MARGIN_T: f64 = 40.0;
const PLOT: f64 = 420.0;
const MAX_CELLS: usize = 180;

pub struct Series {
    pub label: String,
    pub color: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

pub struct Marker {
    pub x: f64,
    pub y: f64,
    pub color: String,
    pub filled: bool,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x.0) / (self.x.1 - self.x.0) * PLOT
    }

    fn py(&self, y: f64) -> f64 {
        MARGIN_T + PLOT - (y - self.y.0) / (self.y.1 - self.y.0) * PLOT
    }
}

fn header(out: &mut String, width: f64, height: f64, title: &str) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{width}" height="{height}" fill="white"/>"#).unwrap();
    writeln!(out, r#"<text x="{:.1}" y="22" font-size="14" text-anchor="middle">{}</text>"#, width / 2.0, escape(title))
        .unwrap();
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(out: &mut String, frame: &Frame, xlabel: &str, ylabel: &str) {
    writeln!(
        out,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{PLOT}" height="{PLOT}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    for k in 0..=4 {
        let fx = frame.x.0 + (frame.x.1 - frame.x.0) * k as f64 / 4.0;
        let fy = frame.y.0 + (frame.y.1 - frame.y.0) * k as f64 / 4.0;
        let (x, y) = (frame.px(fx), frame.py(fy));
        let bottom = MARGIN_T + PLOT;
        writeln!(out, r#"<line x1="{x:.2}" y1="{bottom}" x2="{x:.2}" y2="{:.1}" stroke="black"/>"#, bottom + 5.0).unwrap();
        writeln!(out, r#"<text x="{x:.2}" y="{:.1}" text-anchor="middle">{}</text>"#, bottom + 18.0, tick(fx)).unwrap();
        writeln!(out, r#"<line x1="{:.1}" y1="{y:.2}" x2="{MARGIN_L}" y2="{y:.2}" stroke="black"/>"#, MARGIN_L - 5.0).unwrap();
        writeln!(out, r#"<text x="{:.1}" y="{:.2}" text-anchor="end">{}</text>"#, MARGIN_L - 8.0, y + 4.0, tick(fy)).unwrap();
    }
    writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        MARGIN_L + PLOT / 2.0,
        MARGIN_T + PLOT + 38.0,
        escape(xlabel)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        MARGIN_T + PLOT / 2.0,
        MARGIN_T + PLOT / 2.0,
        escape(ylabel)
    )
    .unwrap();
}

fn tick(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn pixel_polyline(out: &mut String, pixels: &[(f64, f64)], color: &str, dashed: bool) {
    let mut run: Vec<String> = Vec::new();
    let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
    let flush = |out: &mut String, run: &mut Vec<String>| {
        if run.len() > 1 {
            writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"{dash}/>"#, run.join(" "))
                .unwrap();
        }
        run.clear();
    };
    for &(x, y) in pixels {
        if x.is_finite() && y.is_finite() {
            run.push(format!("{x:.2},{y:.2}"));
        } else {
            flush(out, &mut run);
        }
    }
    flush(out, &mut run);
}

fn polyline(out: &mut String, frame: &Frame, s: &Series) {
    let pixels: Vec<(f64, f64)> = s.points.iter().map(|&(x, y)| (frame.px(x), frame.py(y))).collect();
    pixel_polyline(out, &pixels, &s.color, s.dashed);
}

fn markers(out: &mut String, frame: &Frame, ms: &[Marker]) {
    for m in ms {
        let fill = if m.filled { m.color.as_str() } else { "white" };
        writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{fill}" stroke="{}" stroke-width="1.5"/>"#,
            frame.px(m.x),
            frame.py(m.y),
            m.color
        )
        .unwrap();
    }
}

fn legend(out: &mut String, x: f64, entries: &[(&str, &str)]) {
    for (k, (label, color)) in entries.iter().enumerate() {
        let y = MARGIN_T + 10.0 + 18.0 * k as f64;
        writeln!(out, r#"<rect x="{x:.1}" y="{:.1}" width="12" height="12" fill="{color}"/>"#, y - 10.0).unwrap();
        writeln!(out, r#"<text x="{:.1}" y="{y:.1}">{}</text>"#, x + 18.0, escape(label)).unwrap();
    }
}

fn cell_plan(n: usize) -> (usize, usize) {
    let stride = n.div_ceil(MAX_CELLS).max(1);
    (stride, (n - 1) / stride + 1)
}

/// Square heatmap of an `n × n` row-major field over `[a, b]²`, rows along
/// the vertical axis. NaN cells are drawn grey.
#[allow(clippy::too_many_arguments)]
pub fn heatmap(
    values: &[f64],
    n: usize,
    extent: (f64, f64),
    range: (f64, f64),
    title: &str,
    colorbar_label: &str,
    overlays: &[Series],
    points: &[Marker],
) -> String {
    let frame = Frame { x: extent, y: extent };
    let mut out = String::new();
    header(&mut out, MARGIN_L + PLOT + 130.0, MARGIN_T + PLOT + 60.0, title);
    let (stride, cells) = cell_plan(n);
    let size = PLOT / cells as f64;
    for ci in 0..cells {
        for cj in 0..cells {
            let (i, j) = ((ci * stride).min(n - 1), (cj * stride).min(n - 1));
            let v = values[i * n + j];
            let fill = if v.is_nan() { "#bbbbbb".to_string() } else { viridis((v - range.0) / (range.1 - range.0)) };
            writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                MARGIN_L + cj as f64 * size,
                MARGIN_T + PLOT - (ci + 1) as f64 * size,
                size + 0.05,
                size + 0.05
            )
            .unwrap();
        }
    }
    for s in overlays {
        polyline(&mut out, &frame, s);
    }
    markers(&mut out, &frame, points);
    axes(&mut out, &frame, "θ′ (rad)", "θ (rad)");
    let bx = MARGIN_L + PLOT + 25.0;
    for k in 0..50 {
        let t = k as f64 / 49.0;
        writeln!(
            out,
            r#"<rect x="{bx}" y="{:.2}" width="18" height="{:.2}" fill="{}"/>"#,
            MARGIN_T + PLOT * (1.0 - (k + 1) as f64 / 50.0),
            PLOT / 50.0 + 0.5,
            viridis(t)
        )
        .unwrap();
    }
    writeln!(out, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, bx + 24.0, MARGIN_T + 10.0, tick(range.1)).unwrap();
    writeln!(out, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, bx + 24.0, MARGIN_T + PLOT, tick(range.0)).unwrap();
    writeln!(out, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, bx, MARGIN_T + PLOT + 20.0, escape(colorbar_label)).unwrap();
    out.push_str("</svg>\n");
    out
}

/// Semi-transparent boolean masks on a shared `[a, b]²` frame.
pub fn mask_overlay(
    masks: &[(&str, &str, &[bool])],
    n: usize,
    extent: (f64, f64),
    title: &str,
    overlays: &[Series],
    points: &[Marker],
) -> String {
    let frame = Frame { x: extent, y: extent };
    let mut out = String::new();
    header(&mut out, MARGIN_L + PLOT + 170.0, MARGIN_T + PLOT + 60.0, title);
    let (stride, cells) = cell_plan(n);
    let size = PLOT / cells as f64;
    for (_, color, mask) in masks {
        writeln!(out, r#"<g fill="{color}" fill-opacity="0.45">"#).unwrap();
        for ci in 0..cells {
            for cj in 0..cells {
                let (i, j) = ((ci * stride).min(n - 1), (cj * stride).min(n - 1));
                if mask[i * n + j] {
                    writeln!(
                        out,
                        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/>"#,
                        MARGIN_L + cj as f64 * size,
                        MARGIN_T + PLOT - (ci + 1) as f64 * size,
                        size + 0.05,
                        size + 0.05
                    )
                    .unwrap();
                }
            }
        }
        out.push_str("</g>\n");
    }
    for s in overlays {
        polyline(&mut out, &frame, s);
    }
    markers(&mut out, &frame, points);
    axes(&mut out, &frame, "θ′ (rad)", "θ (rad)");
    let mut entries: Vec<(&str, &str)> = masks.iter().map(|(l, c, _)| (*l, *c)).collect();
    entries.extend(overlays.iter().filter(|s| !s.label.is_empty()).map(|s| (s.label.as_str(), s.color.as_str())));
    entries.dedup();
    legend(&mut out, MARGIN_L + PLOT + 15.0, &entries);
    out.push_str("</svg>\n");
    out
}

/// Cartesian line plot.
pub fn line_plot(
    series: &[Series],
    points: &[Marker],
    x: (f64, f64),
    y: (f64, f64),
    title: &str,
    labels: (&str, &str),
) -> String {
    let frame = Frame { x, y };
    let mut out = String::new();
    header(&mut out, MARGIN_L + PLOT + 170.0, MARGIN_T + PLOT + 60.0, title);
    for s in series {
        polyline(&mut out, &frame, s);
    }
    markers(&mut out, &frame, points);
    axes(&mut out, &frame, labels.0, labels.1);
    let mut entries: Vec<(&str, &str)> =
        series.iter().filter(|s| !s.label.is_empty()).map(|s| (s.label.as_str(), s.color.as_str())).collect();
    entries.dedup();
    legend(&mut out, MARGIN_L + PLOT + 15.0, &entries);
    out.push_str("</svg>\n");
    out
}

/// Polar plot of `r(θ)` curves, θ measured from the vertical axis and
/// mirrored into the left half-plane.
pub fn polar_plot(series: &[Series], title: &str) -> String {
    let mut out = String::new();
    let (w, h) = (PLOT + 200.0, PLOT + 70.0);
    header(&mut out, w, h, title);
    let (cx, cy, radius) = (PLOT / 2.0 + 20.0, MARGIN_T + PLOT / 2.0, PLOT / 2.0 - 10.0);
    let r_max = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    for k in 1..=4 {
        writeln!(
            out,
            r##"<circle cx="{cx:.1}" cy="{cy:.1}" r="{:.2}" fill="none" stroke="#cccccc"/>"##,
            radius * k as f64 / 4.0
        )
        .unwrap();
    }
    writeln!(out, r##"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="#cccccc"/>"##, cy - radius, cy + radius)
        .unwrap();
    writeln!(out, r#"<text x="{:.1}" y="{:.1}">max {}</text>"#, cx + 4.0, cy - radius - 4.0, format_sig(r_max)).unwrap();
    for s in series {
        for side in [1.0, -1.0] {
            let pixels: Vec<(f64, f64)> = s
                .points
                .iter()
                .map(|&(t, r)| {
                    let rr = r / r_max * radius;
                    (cx + side * rr * t.sin(), cy - rr * t.cos())
                })
                .collect();
            pixel_polyline(&mut out, &pixels, &s.color, s.dashed);
        }
    }
    let entries: Vec<(&str, &str)> = series.iter().map(|s| (s.label.as_str(), s.color.as_str())).collect();
    legend(&mut out, PLOT + 40.0, &entries);
    out.push_str("</svg>\n");
    out
}

fn format_sig(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.3e}")
    } else {
        format!("{v:.3}")
    }
}

/// Grouped bar chart; bar `k` of every series shares the category `labels[k]`.
pub fn bar_chart(series: &[(&str, &str, Vec<f64>)], labels: &[String], title: &str, ylabel: &str) -> String {
    let frame = Frame { x: (0.0, labels.len() as f64), y: (0.0, 1.0) };
    let mut out = String::new();
    header(&mut out, MARGIN_L + PLOT + 170.0, MARGIN_T + PLOT + 60.0, title);
    let group = PLOT / labels.len().max(1) as f64;
    let bar = group * 0.8 / series.len().max(1) as f64;
    for (s, (_, color, values)) in series.iter().enumerate() {
        for (k, &v) in values.iter().enumerate() {
            let v = if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 };
            let x = MARGIN_L + k as f64 * group + group * 0.1 + s as f64 * bar;
            writeln!(
                out,
                r#"<rect x="{x:.2}" y="{:.2}" width="{bar:.2}" height="{:.2}" fill="{color}"/>"#,
                frame.py(v),
                v * PLOT
            )
            .unwrap();
        }
    }
    writeln!(
        out,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{PLOT}" height="{PLOT}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    for (k, l) in labels.iter().enumerate() {
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.1}" text-anchor="middle">{}</text>"#,
            MARGIN_L + (k as f64 + 0.5) * group,
            MARGIN_T + PLOT + 18.0,
            escape(l)
        )
        .unwrap();
    }
    for k in 0..=4 {
        let v = k as f64 / 4.0;
        writeln!(out, r#"<text x="{:.1}" y="{:.2}" text-anchor="end">{}</text>"#, MARGIN_L - 8.0, frame.py(v) + 4.0, tick(v))
            .unwrap();
    }
    writeln!(
        out,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        MARGIN_T + PLOT / 2.0,
        MARGIN_T + PLOT / 2.0,
        escape(ylabel)
    )
    .unwrap();
    let entries: Vec<(&str, &str)> = series.iter().map(|(l, c, _)| (*l, *c)).collect();
    legend(&mut out, MARGIN_L + PLOT + 15.0, &entries);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colormap_endpoints() {
        assert_eq!(viridis(0.0), "#440154");
        assert_eq!(viridis(1.0), "#fde725");
        assert_eq!(viridis(f64::NAN), "#440154");
        assert_eq!(viridis(7.0), "#fde725");
    }

    #[test]
    fn heatmap_is_well_formed_and_downsampled() {
        let n = 721;
        let values: Vec<f64> = (0..n * n).map(|k| (k % n) as f64 / n as f64).collect();
        let svg = heatmap(&values, n, (0.0, 1.0), (0.0, 1.0), "t", "v", &[], &[]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        let cells = svg.matches("<rect").count();
        assert!(cells < 200 * 200, "{cells}");
    }

    #[test]
    fn broken_polylines_skip_non_finite_points() {
        let s = Series {
            label: "a".into(),
            color: "red".into(),
            points: vec![(0.0, 0.0), (0.5, 0.5), (f64::NAN, 0.0), (0.6, 0.6), (0.7, 0.7)],
            dashed: false,
        };
        let svg = line_plot(&[s], &[], (0.0, 1.0), (0.0, 1.0), "t", ("x", "y"));
        assert_eq!(svg.matches("<polyline").count(), 2);
    }
}
