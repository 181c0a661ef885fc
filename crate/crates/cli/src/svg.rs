//! Minimal native SVG output: log-log line charts for convergence and decay
//! diagnostics. No external plotting dependency.

use std::path::Path;

use anyhow::Result;

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

const W: f64 = 640.0;
const H: f64 = 440.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Writes a log-log chart of the given series (non-positive points are
/// skipped, since they have no logarithm).
pub fn write_loglog(path: &Path, title: &str, series: &[Series]) -> Result<()> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|&(x, y)| x > 0.0 && y > 0.0)
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    let (x0, x1) = span(pts.iter().map(|p| p.0));
    let (y0, y1) = span(pts.iter().map(|p| p.1));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"monospace\" font-size=\"12\">\n"
    ));
    out.push_str(&format!(
        "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\">{title}</text>\n",
        W / 2.0
    ));
    // Decade grid lines and labels.
    for dx in (x0.floor() as i64)..=(x1.ceil() as i64) {
        let x = sx(dx as f64);
        if (MARGIN..=W - MARGIN).contains(&x) {
            out.push_str(&format!(
                "<line x1=\"{x:.1}\" y1=\"{MARGIN}\" x2=\"{x:.1}\" y2=\"{:.1}\" \
                 stroke=\"#ddd\"/>\n<text x=\"{x:.1}\" y=\"{:.1}\" \
                 text-anchor=\"middle\">1e{dx}</text>\n",
                H - MARGIN,
                H - MARGIN + 16.0
            ));
        }
    }
    for dy in (y0.floor() as i64)..=(y1.ceil() as i64) {
        let y = sy(dy as f64);
        if (MARGIN..=H - MARGIN).contains(&y) {
            out.push_str(&format!(
                "<line x1=\"{MARGIN}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" \
                 stroke=\"#ddd\"/>\n<text x=\"{:.1}\" y=\"{:.1}\" \
                 text-anchor=\"end\">1e{dy}</text>\n",
                W - MARGIN,
                MARGIN - 6.0,
                y + 4.0
            ));
        }
    }
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path_d: Vec<String> = s
            .points
            .iter()
            .filter(|&&(x, y)| x > 0.0 && y > 0.0)
            .enumerate()
            .map(|(k, &(x, y))| {
                let cmd = if k == 0 { 'M' } else { 'L' };
                format!("{cmd}{:.1} {:.1}", sx(x.log10()), sy(y.log10()))
            })
            .collect();
        out.push_str(&format!(
            "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" fill=\"{color}\">{}</text>\n",
            path_d.join(" "),
            W - MARGIN + 4.0,
            MARGIN + 14.0 * (i as f64 + 1.0),
            s.label
        ));
    }
    out.push_str("</svg>\n");
    std::fs::write(path, out)?;
    Ok(())
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}
