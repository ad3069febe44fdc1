//! Sweep reporting: CSV, JSON and a log-log SVG plot.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

use super::sweep::SweepResult;

/// CSV with the fixed schema
/// `variant,p,level,dofs,h,err_h,err_hstar,err_l2,rate_h,seconds`.
pub fn csv_string(result: &SweepResult) -> String {
    let mut out = String::from("variant,p,level,dofs,h,err_h,err_hstar,err_l2,rate_h,seconds\n");
    for row in &result.rows {
        let rate = row
            .rate_h
            .map(|r| format!("{r:.6}"))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{:.12e},{:.12e},{:.12e},{:.12e},{},{:.3}",
            row.variant, row.p, row.level, row.dofs, row.h, row.err_h, row.err_hstar, row.err_l2,
            rate, row.seconds
        );
    }
    out
}

pub fn write_csv(result: &SweepResult, path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(result))?;
    Ok(())
}

pub fn write_json(result: &SweepResult, path: &Path) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(result)?)?;
    Ok(())
}

/// Log-log plot of the broken-norm error against h, one series per
/// (variant, degree), with dashed reference slopes `p - 1`.
pub fn write_svg(result: &SweepResult, path: &Path) -> Result<()> {
    const W: f64 = 720.0;
    const H: f64 = 540.0;
    const ML: f64 = 70.0;
    const MR: f64 = 30.0;
    const MT: f64 = 40.0;
    const MB: f64 = 60.0;
    const COLORS: [&str; 8] = [
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
    ];

    let points: Vec<(f64, f64)> = result
        .rows
        .iter()
        .filter(|r| r.failure.is_none() && r.h > 0.0 && r.err_h > 0.0)
        .map(|r| (r.h.log10(), r.err_h.log10()))
        .collect();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    if points.is_empty() {
        let _ = writeln!(svg, "<text x=\"20\" y=\"30\">no data</text></svg>");
        std::fs::write(path, svg)?;
        return Ok(());
    }
    let (mut x0, mut x1) = (f64::MAX, f64::MIN);
    let (mut y0, mut y1) = (f64::MAX, f64::MIN);
    for &(x, y) in &points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let pad = 0.3;
    x0 -= pad * 0.25;
    x1 += pad * 0.25;
    y0 -= pad;
    y1 += pad;
    let sx = |x: f64| ML + (x - x0) / (x1 - x0) * (W - ML - MR);
    let sy = |y: f64| H - MB - (y - y0) / (y1 - y0) * (H - MT - MB);

    // axes and decade ticks
    let _ = writeln!(
        svg,
        "<rect x=\"{ML}\" y=\"{MT}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333\"/>",
        W - ML - MR,
        H - MT - MB
    );
    for d in (x0.floor() as i64)..=(x1.ceil() as i64) {
        let x = sx(d as f64);
        if x >= ML && x <= W - MR {
            let _ = writeln!(
                svg,
                "<line x1=\"{x:.1}\" y1=\"{MT}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#ddd\"/>\
                 <text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">1e{d}</text>",
                H - MB,
                H - MB + 18.0
            );
        }
    }
    for d in (y0.floor() as i64)..=(y1.ceil() as i64) {
        let y = sy(d as f64);
        if y >= MT && y <= H - MB {
            let _ = writeln!(
                svg,
                "<line x1=\"{ML}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#ddd\"/>\
                 <text x=\"{:.1}\" y=\"{y:.1}\" text-anchor=\"end\">1e{d}</text>",
                W - MR,
                ML - 6.0
            );
        }
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">h</text>\
         <text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">broken-norm error</text>",
        (ML + W - MR) / 2.0,
        H - 18.0,
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0
    );

    // series per (variant, degree)
    let mut series: Vec<((String, usize), Vec<(f64, f64)>)> = Vec::new();
    for row in &result.rows {
        if row.failure.is_some() || !(row.h > 0.0) || !(row.err_h > 0.0) {
            continue;
        }
        let key = (row.variant.to_string(), row.p);
        match series.iter_mut().find(|(k, _)| *k == key) {
            Some((_, pts)) => pts.push((row.h.log10(), row.err_h.log10())),
            None => series.push((key, vec![(row.h.log10(), row.err_h.log10())])),
        }
    }
    for (si, ((variant, p), pts)) in series.iter().enumerate() {
        let color = COLORS[si % COLORS.len()];
        let path_d: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            path_d.join(" ")
        );
        for &(x, y) in pts {
            let _ = writeln!(
                svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>",
                sx(x),
                sy(y)
            );
        }
        // dashed reference slope p-1 anchored at the finest point
        if let Some(&(xf, yf)) = pts.last() {
            let slope = (*p as f64) - 1.0;
            let xr = xf + 0.6;
            let yr = yf + slope * 0.6;
            let _ = writeln!(
                svg,
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{color}\" stroke-dasharray=\"5 4\" opacity=\"0.6\"/>",
                sx(xf),
                sy(yf),
                sx(xr),
                sy(yr)
            );
        }
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"{color}\">{variant} p={p}</text>",
            W - MR - 130.0,
            MT + 16.0 * (si as f64 + 1.0)
        );
    }
    let _ = writeln!(svg, "</svg>");
    std::fs::write(path, svg)?;
    Ok(())
}
