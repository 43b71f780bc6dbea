//! Curve CSV and self-contained SVG line plots with a ±SD band.

use std::fmt::Write as _;
use std::io::Write;

use super::aggregate::{AggregateCurve, CurvePoint};
use crate::error::{Error, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 160.0;
const MARGIN_T: f64 = 20.0;
const MARGIN_B: f64 = 50.0;
/// Upper bound on plotted points per curve.
pub const MAX_POINTS: usize = 1000;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
    "#17becf",
];

/// Long-format CSV of several curves: `curve,step,mean,sd`.
pub fn write_curves_csv<W: Write>(w: W, curves: &[AggregateCurve]) -> Result<()> {
    if curves.is_empty() {
        return Err(Error::EmptyCurves);
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["curve", "step", "mean", "sd"])?;
    for c in curves {
        for p in &c.points {
            out.write_record([c.label.clone(), p.step.to_string(), p.mean.to_string(), p.sd.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Keeps every k-th point (plus the last) so at most [`MAX_POINTS`] remain.
pub fn downsample(points: &[CurvePoint]) -> Vec<CurvePoint> {
    if points.len() <= MAX_POINTS {
        return points.to_vec();
    }
    let k = points.len().div_ceil(MAX_POINTS - 1);
    let mut out: Vec<CurvePoint> = points.iter().step_by(k).copied().collect();
    if out.last() != points.last() {
        out.push(*points.last().unwrap());
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// One polyline per curve for the mean and one polygon for mean ± SD.
pub fn render_svg(curves: &[AggregateCurve], title: &str) -> Result<String> {
    if curves.is_empty() {
        return Err(Error::EmptyCurves);
    }
    let sampled: Vec<Vec<CurvePoint>> = curves.iter().map(|c| downsample(&c.points)).collect();
    let all = sampled.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in all {
        x0 = x0.min(p.step as f64);
        x1 = x1.max(p.step as f64);
        y0 = y0.min(p.mean - p.sd);
        y1 = y1.max(p.mean + p.sd);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-9 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_T + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            sx(xv),
            HEIGHT - MARGIN_B + 18.0,
            xv.round()
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.1}</text>"#,
            MARGIN_L - 6.0,
            sy(yv) + 4.0,
            yv
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">step</text>"#,
        MARGIN_L + pw / 2.0,
        HEIGHT - 12.0
    );

    for (i, (curve, pts)) in curves.iter().zip(&sampled).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut band = String::new();
        for p in pts {
            let _ = write!(band, "{:.2},{:.2} ", sx(p.step as f64), sy(p.mean + p.sd));
        }
        for p in pts.iter().rev() {
            let _ = write!(band, "{:.2},{:.2} ", sx(p.step as f64), sy(p.mean - p.sd));
        }
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            band.trim_end()
        );
        let mut line = String::new();
        for p in pts {
            let _ = write!(line, "{:.2},{:.2} ", sx(p.step as f64), sy(p.mean));
        }
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            line.trim_end()
        );
        let ly = MARGIN_T + 14.0 + 18.0 * i as f64;
        let lx = WIDTH - MARGIN_R + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{:.2}" x2="{}" y2="{:.2}" stroke="{color}" stroke-width="3"/>"#,
            ly - 4.0,
            lx + 20.0,
            ly - 4.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, lx + 26.0, escape(&curve.label));
    }
    s.push_str("</svg>\n");
    Ok(s)
}
