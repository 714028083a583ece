//! Single-series SVG line plots of a CSV column against `t`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use super::csv::{read_table, Table, TableError};

#[derive(Debug, Error)]
pub enum SvgError {
    #[error("column `{0}` not found")]
    MissingColumn(String),
    #[error("no data rows")]
    Empty,
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 60.0;

/// Polyline simplification tolerance, as a fraction of the plot extent.
pub const FLATTEN_TOLERANCE: f64 = 1e-4;

/// Ramer–Douglas–Peucker simplification in coordinates normalized by the
/// axis spans. Returns the indices of the kept points.
fn flatten(points: &[(f64, f64)], x_span: f64, y_span: f64, tolerance: f64) -> Vec<usize> {
    if points.len() <= 2 {
        return (0..points.len()).collect();
    }
    let norm = |(x, y): (f64, f64)| (x / x_span, y / y_span);
    let mut keep = vec![false; points.len()];
    keep[0] = true;
    keep[points.len() - 1] = true;
    let mut stack = vec![(0, points.len() - 1)];
    while let Some((lo, hi)) = stack.pop() {
        let (ax, ay) = norm(points[lo]);
        let (bx, by) = norm(points[hi]);
        let (dx, dy) = (bx - ax, by - ay);
        let len = dx.hypot(dy);
        let mut worst = (0.0, lo);
        for (i, &p) in points.iter().enumerate().take(hi).skip(lo + 1) {
            let (px, py) = norm(p);
            let dist = if len == 0.0 {
                (px - ax).hypot(py - ay)
            } else {
                ((px - ax) * dy - (py - ay) * dx).abs() / len
            };
            if dist > worst.0 {
                worst = (dist, i);
            }
        }
        if worst.0 > tolerance {
            keep[worst.1] = true;
            stack.push((lo, worst.1));
            stack.push((worst.1, hi));
        }
    }
    (0..points.len()).filter(|&i| keep[i]).collect()
}

fn axis_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    let scale = lo.abs().max(hi.abs()).max(1.0);
    if hi - lo <= 1e-12 * scale {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Render `column` of a parsed table against its `t` column.
pub fn render_svg(table: &Table, column: &str) -> Result<String, SvgError> {
    let x_idx = table
        .column("t")
        .ok_or_else(|| SvgError::MissingColumn("t".into()))?;
    let y_idx = table
        .column(column)
        .ok_or_else(|| SvgError::MissingColumn(column.into()))?;
    if table.rows.is_empty() {
        return Err(SvgError::Empty);
    }
    let points: Vec<(f64, f64)> = table.rows.iter().map(|r| (r[x_idx], r[y_idx])).collect();
    let (x_lo, x_hi) = axis_range(points.iter().map(|p| p.0));
    let (y_lo, y_hi) = axis_range(points.iter().map(|p| p.1));
    let kept = flatten(&points, x_hi - x_lo, y_hi - y_lo, FLATTEN_TOLERANCE);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = plot_w / (x_hi - x_lo);
    let sy = plot_h / (y_hi - y_lo);
    // Data coordinates map to pixels through this affine transform.
    let tx = MARGIN_LEFT - x_lo * sx;
    let ty = MARGIN_TOP + plot_h + y_lo * sy;
    let digest = table.digest.as_deref().unwrap_or("unknown");
    let x0 = MARGIN_LEFT;
    let x1 = MARGIN_LEFT + plot_w;
    let y0 = MARGIN_TOP + plot_h;
    let y1 = MARGIN_TOP;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{x0}" y="24" font-family="sans-serif" font-size="16">{} vs t</text>"#,
        escape(column)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{x0}" y="40" font-family="monospace" font-size="10">config {}</text>"#,
        escape(digest)
    );
    let _ = writeln!(
        svg,
        r#"<g stroke="black" stroke-width="1"><line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>"#
    );
    let _ = writeln!(
        svg,
        r#"<g font-family="sans-serif" font-size="11"><text x="{x0}" y="{}" text-anchor="middle">{x_lo}</text><text x="{x1}" y="{}" text-anchor="middle">{x_hi}</text><text x="{}" y="{y0}" text-anchor="end">{y_lo}</text><text x="{}" y="{}" text-anchor="end">{y_hi}</text><text x="{}" y="{}" text-anchor="middle">t</text><text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">{}</text></g>"#,
        y0 + 16.0,
        y0 + 16.0,
        x0 - 6.0,
        x0 - 6.0,
        y1 + 4.0,
        (x0 + x1) / 2.0,
        y0 + 40.0,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(column)
    );
    let coords: Vec<String> = kept
        .iter()
        .map(|&i| format!("{:?},{:?}", points[i].0, points[i].1))
        .collect();
    let _ = writeln!(
        svg,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" vector-effect="non-scaling-stroke" transform="matrix({sx:?} 0 0 {:?} {tx:?} {ty:?})" points="{}"/>"#,
        -sy,
        coords.join(" ")
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Plot `column` of the CSV at `csv` against `t` and write the SVG to `out`.
pub fn emit_svg_plot(csv: &Path, column: &str, out: &Path) -> Result<(), SvgError> {
    let text = fs::read_to_string(csv)?;
    let table = read_table(&text)?;
    let svg = render_svg(&table, column)?;
    fs::write(out, svg)?;
    Ok(())
}
