//! CSV tables and standalone SVG line plots.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::CliError;

/// Shortest representation that parses back to the same value.
pub fn format_float(x: f64) -> String {
    format!("{x}")
}

pub fn write_csv<W: Write>(out: W, header: &[String], rows: &[Vec<f64>]) -> Result<(), CliError> {
    if rows.is_empty() {
        return Err(CliError::Output("no rows to write".into()));
    }
    if let Some(row) = rows.iter().find(|r| r.len() != header.len()) {
        return Err(CliError::Output(format!(
            "row of {} values under {} columns",
            row.len(),
            header.len()
        )));
    }
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row.iter().map(|&x| format_float(x)))
            .map_err(err)?;
    }
    w.flush().map_err(|e| CliError::Output(e.to_string()))
}

pub fn emit_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write_csv(&mut buf, header, rows)?;
    std::fs::write(path, buf).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axes {
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 55.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Round number steps of 1, 2 or 5 times a power of ten giving about `target` ticks.
fn linear_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let raw = (hi - lo) / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step - 1e-9).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn log_ticks(lo_exp: i32, hi_exp: i32) -> Vec<f64> {
    let mut ticks = Vec::new();
    let sparse = hi_exp - lo_exp < 2;
    for e in lo_exp..=hi_exp {
        let base = 10f64.powi(e);
        ticks.push(base);
        if sparse && e < hi_exp {
            ticks.push(2.0 * base);
            ticks.push(5.0 * base);
        }
    }
    ticks
}

fn tick_label(v: f64, log: bool) -> String {
    if log {
        format!("{v:e}")
    } else {
        // Trim representation noise from multiples of the step.
        let s = format!("{:.6}", v);
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".into()
        } else {
            s.into()
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Single-panel plot with one polyline per curve. Non-finite points, and
/// non-positive values on a log axis, are left out.
pub fn render_svg(curves: &[Curve], axes: &Axes) -> Result<String, CliError> {
    let plottable =
        |&(x, y): &(f64, f64)| x.is_finite() && y.is_finite() && (!axes.log_y || y > 0.0);
    let kept: Vec<Vec<(f64, f64)>> = curves
        .iter()
        .map(|c| c.points.iter().copied().filter(plottable).collect())
        .collect();
    let all: Vec<(f64, f64)> = kept.iter().flatten().copied().collect();
    if all.is_empty() {
        return Err(CliError::Output("nothing to plot".into()));
    }
    let (mut x_lo, mut x_hi) = all
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.0), b.max(p.0))
        });
    if x_lo == x_hi {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    let (y_min, y_max) = all
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.1), b.max(p.1))
        });

    let (y_lo, y_hi, y_ticks) = if axes.log_y {
        let lo = y_min.log10().floor() as i32;
        let mut hi = y_max.log10().ceil() as i32;
        if hi == lo {
            hi += 1;
        }
        (lo as f64, hi as f64, log_ticks(lo, hi))
    } else {
        let (mut lo, mut hi) = (y_min, y_max);
        if lo == hi {
            lo -= 0.5 * lo.abs().max(1.0);
            hi += 0.5 * hi.abs().max(1.0);
        }
        (lo, hi, linear_ticks(lo, hi, 6))
    };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| {
        let v = if axes.log_y { y.log10() } else { y };
        TOP + (1.0 - (v - y_lo) / (y_hi - y_lo)) * plot_h
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for t in linear_ticks(x_lo, x_hi, 6) {
        let x = px(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text class="xtick" x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 18.0,
            tick_label(t, false)
        );
    }
    for t in y_ticks {
        let y = py(t);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#,
            LEFT - 5.0
        );
        let _ = writeln!(
            s,
            r#"<text class="ytick" x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            y + 4.0,
            tick_label(t, axes.log_y)
        );
    }
    let _ = writeln!(
        s,
        r#"<text class="xlabel" x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + 0.5 * plot_w,
        HEIGHT - 12.0,
        escape(&axes.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text class="ylabel" x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        TOP + 0.5 * plot_h,
        TOP + 0.5 * plot_h,
        escape(&axes.y_label)
    );
    for (i, (curve, points)) in curves.iter().zip(&kept).enumerate() {
        let color = COLORS[i % COLORS.len()];
        if !points.is_empty() {
            let coords: Vec<String> = points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
        }
        let ly = TOP + 14.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="1.5"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            s,
            r#"<text class="legend" x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&curve.label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_svg(path: &Path, curves: &[Curve], axes: &Axes) -> Result<(), CliError> {
    let svg = render_svg(curves, axes)?;
    std::fs::write(path, svg).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
