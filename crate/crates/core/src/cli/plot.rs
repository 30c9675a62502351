//! SVG line charts of mean performance against breadth.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::output::{read_csv, ResultRow};
use crate::error::{Error, Result};

const WIDTH: f64 = 820.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 210.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;

const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#393b79", "#637939",
];

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PlotOptions {
    /// Fixed vertical axis; points outside are clipped.
    pub y_range: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub svg: String,
    /// Curves with at least one point inside the vertical range.
    pub visible: Vec<String>,
    /// Curves entirely outside the vertical range.
    pub hidden: Vec<String>,
}

struct Curve {
    label: String,
    points: Vec<(f64, f64, f64)>,
}

/// Parses `lo,hi` or `lo:hi`.
pub fn parse_y_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once([',', ':'])
        .ok_or_else(|| format!("`{s}`: expected LO,HI"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("`{lo}` is not a number"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("`{hi}` is not a number"))?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(format!("need finite LO < HI, got {lo}, {hi}"));
    }
    Ok((lo, hi))
}

/// Groups rows into one curve per (method, N_s), splitting further by any
/// other column that varies in the file.
fn curves(rows: &[ResultRow]) -> Vec<Curve> {
    let varies = |f: &dyn Fn(&ResultRow) -> String| rows.iter().any(|r| f(r) != f(&rows[0]));
    let cost_varies = varies(&|r| r.cost.clone());
    let kappa_varies = varies(&|r| r.kappa.to_string());
    let r_varies = varies(&|r| r.r.to_string());
    let mut groups: BTreeMap<String, Vec<(f64, f64, f64)>> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for row in rows {
        let mut label = format!("{} N_s={}", row.method, row.n_groups);
        if cost_varies {
            write!(label, " {}", row.cost).unwrap();
        }
        if kappa_varies {
            write!(label, " κ={}", row.kappa).unwrap();
        }
        if r_varies {
            write!(label, " r={}", row.r).unwrap();
        }
        if !groups.contains_key(&label) {
            order.push(label.clone());
        }
        groups.entry(label).or_default().push((row.beta, row.mean, row.std_error));
    }
    order
        .into_iter()
        .map(|label| {
            let mut points = groups.remove(&label).unwrap();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Curve { label, points }
        })
        .collect()
}

/// Round tick spacing giving about `target` ticks over `[lo, hi]`.
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= target as f64)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
        (lo - pad, hi + pad)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render(rows: &[ResultRow], options: &PlotOptions) -> Result<Chart> {
    if rows.is_empty() {
        return Err(Error::Csv("no data rows to plot".into()));
    }
    let curves = curves(rows);
    let (x_lo, x_hi) = padded(
        rows.iter().map(|r| r.beta).fold(f64::INFINITY, f64::min),
        rows.iter().map(|r| r.beta).fold(f64::NEG_INFINITY, f64::max),
    );
    let (y_lo, y_hi) = match options.y_range {
        Some(range) => range,
        None => padded(
            rows.iter().map(|r| r.mean - r.std_error).fold(f64::INFINITY, f64::min),
            rows.iter().map(|r| r.mean + r.std_error).fold(f64::NEG_INFINITY, f64::max),
        ),
    };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        svg,
        r#"<defs><clipPath id="plot-area"><rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}"/></clipPath></defs>"#
    )
    .unwrap();

    for t in ticks(x_lo, x_hi, 10) {
        let x = sx(t);
        writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#e6e6e6"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{t}</text>"##,
            TOP + plot_h,
            TOP + plot_h + 18.0
        )
        .unwrap();
    }
    for t in ticks(y_lo, y_hi, 8) {
        let y = sy(t);
        writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e6e6e6"/><text x="{:.2}" y="{:.2}" text-anchor="end">{t}</text>"##,
            LEFT + plot_w,
            LEFT - 6.0,
            y + 4.0
        )
        .unwrap();
    }
    writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">β</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">mean performance</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    )
    .unwrap();

    let mut visible = Vec::new();
    let mut hidden = Vec::new();
    for (k, curve) in curves.iter().enumerate() {
        if !curve.points.iter().any(|p| p.1 >= y_lo && p.1 <= y_hi) {
            hidden.push(curve.label.clone());
            continue;
        }
        let color = PALETTE[k % PALETTE.len()];
        let label = escape(&curve.label);
        writeln!(svg, r#"<g class="curve" data-label="{label}" clip-path="url(#plot-area)">"#).unwrap();
        let upper = curve.points.iter().map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1 + p.2)));
        let lower = curve.points.iter().rev().map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1 - p.2)));
        let band: Vec<String> = upper.chain(lower).collect();
        writeln!(svg, r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#, band.join(" ")).unwrap();
        let line: Vec<String> = curve.points.iter().map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1))).collect();
        if line.len() > 1 {
            writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, line.join(" ")).unwrap();
        }
        for p in &curve.points {
            writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, sx(p.0), sy(p.1)).unwrap();
        }
        writeln!(svg, "</g>").unwrap();
        let ly = TOP + 8.0 + 16.0 * visible.len() as f64;
        let lx = LEFT + plot_w + 12.0;
        writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{label}</text>"#,
            lx + 18.0,
            lx + 24.0,
            ly + 4.0
        )
        .unwrap();
        visible.push(curve.label.clone());
    }
    if !hidden.is_empty() {
        writeln!(svg, "<!-- outside the vertical range: {} -->", escape(&hidden.join("; ")).replace("--", "- -")).unwrap();
    }
    svg.push_str("</svg>\n");
    Ok(Chart { svg, visible, hidden })
}

/// Reads a result CSV and writes the chart, copying the CSV's manifest
/// comment lines into the SVG. Nothing is written on error.
pub fn plot_file(csv_path: &Path, svg_path: &Path, options: &PlotOptions) -> Result<Chart> {
    let text = std::fs::read_to_string(csv_path).map_err(|e| Error::Io(format!("{}: {e}", csv_path.display())))?;
    let rows = read_csv(&text)?;
    let mut chart = render(&rows, options)?;
    let provenance: Vec<&str> = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| l.trim_start_matches('#').trim())
        .collect();
    if !provenance.is_empty() {
        let comment = format!("<!-- {} -->\n", provenance.join("; ").replace("--", "- -"));
        let at = chart.svg.find('\n').map_or(0, |i| i + 1);
        chart.svg.insert_str(at, &comment);
    }
    std::fs::write(svg_path, &chart.svg).map_err(|e| Error::Io(format!("{}: {e}", svg_path.display())))?;
    Ok(chart)
}
