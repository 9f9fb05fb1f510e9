//! CSV writers with fixed headers and self-contained SVG line plots.

use std::fmt::Write as _;
use std::io::Write;

use crate::dispersion::DispersionReport;
use crate::error::Result;
use crate::profiles::{CoveringResult, IntervalSet};
use crate::pseudospectral::{PsaResult, SigmaCurve};
use crate::semigroup::{DecayTrace, SweepReport};

pub fn num(x: f64) -> String {
    format!("{x:.10e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().flexible(false).from_writer(out)
}

pub const COVERING_HEADER: [&str; 6] =
    ["lambda", "delta", "measure_E", "measure_Etilde", "total_cover_length", "cover_count"];

pub fn write_covering<W: Write>(out: W, rows: &[(IntervalSet, IntervalSet, CoveringResult)]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(COVERING_HEADER)?;
    for (e, et, c) in rows {
        w.write_record([
            num(c.lambda),
            num(c.delta),
            num(e.measure()),
            num(et.measure()),
            num(c.total_length),
            c.count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sigma_curve<W: Write>(out: W, curve: &SigmaCurve) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["lambda", "sigma_min"])?;
    for (l, s) in curve.lambdas.iter().zip(&curve.sigmas) {
        w.write_record([num(*l), num(*s)])?;
    }
    w.flush()?;
    Ok(())
}

pub const PSA_HEADER: [&str; 7] = ["nu", "k", "ell", "m", "psi", "argmin", "c1_effective"];

pub fn write_psa_summary<W: Write>(out: W, rows: &[(f64, f64, i32, usize, &PsaResult)]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(PSA_HEADER)?;
    for (nu, k, ell, m, psa) in rows {
        w.write_record([
            num(*nu),
            num(*k),
            ell.to_string(),
            m.to_string(),
            num(psa.psi),
            num(psa.argmin),
            opt(psa.c1_effective),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace<W: Write>(out: W, trace: &DecayTrace) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["t", "norm"])?;
    for (t, n) in trace.times.iter().zip(&trace.norms) {
        w.write_record([num(*t), num(*n)])?;
    }
    w.flush()?;
    Ok(())
}

pub const FIT_HEADER: [&str; 8] =
    ["rate", "prefactor", "envelope", "residual", "t_lo", "t_hi", "samples", "Lambda"];

pub fn write_fit_summary<W: Write>(out: W, trace: &DecayTrace, lambda: Option<f64>) -> Result<()> {
    let mut w = writer(out);
    w.write_record(FIT_HEADER)?;
    if let Some(f) = &trace.fit {
        w.write_record([
            num(f.rate),
            num(f.prefactor),
            num(f.envelope),
            num(f.residual),
            num(f.window.0),
            num(f.window.1),
            f.samples.to_string(),
            opt(lambda),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const SWEEP_HEADER: [&str; 9] = ["nu", "k", "ell", "m", "Lambda", "rate", "c_effective", "psi", "alpha"];

/// One row per `ν`, then a summary row holding only `alpha`.
pub fn write_sweep<W: Write>(out: W, report: &SweepReport) -> Result<()> {
    let mut w = writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in &report.rows {
        w.write_record([
            num(r.nu),
            num(r.k),
            r.ell.to_string(),
            r.m.to_string(),
            num(r.lambda),
            num(r.fit_rate),
            num(r.c_effective),
            opt(r.psi),
            String::new(),
        ])?;
    }
    let mut summary = vec![String::new(); 8];
    summary.push(num(report.exponent_alpha));
    w.write_record(summary)?;
    w.flush()?;
    Ok(())
}

pub fn write_sweep_summary<W: Write>(out: W, report: &SweepReport) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["alpha", "alpha_stderr", "points"])?;
    w.write_record([num(report.exponent_alpha), num(report.alpha_stderr), report.rows.len().to_string()])?;
    w.flush()?;
    Ok(())
}

pub const DISPERSION_HEADER: [&str; 5] = ["t", "I_low", "I_high", "envelope", "ratio"];
pub const DISPERSION_SUMMARY_HEADER: [&str; 6] = ["nu", "m", "c1", "c2", "C2_fit", "max_ratio"];

pub fn write_dispersion<W: Write>(out: W, report: &DispersionReport) -> Result<()> {
    let mut w = writer(out);
    w.write_record(DISPERSION_HEADER)?;
    for i in 0..report.times.len() {
        w.write_record([
            num(report.times[i]),
            num(report.i_low[i]),
            num(report.i_high[i]),
            num(report.envelope[i]),
            num(report.ratios[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dispersion_summary<W: Write>(out: W, reports: &[DispersionReport]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(DISPERSION_SUMMARY_HEADER)?;
    for r in reports {
        w.write_record([
            num(r.nu),
            r.m.to_string(),
            num(r.c1_used),
            num(r.c2_used),
            num(r.c2_fit),
            num(r.max_ratio),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn transform(v: f64, scale: Scale) -> Option<f64> {
    match scale {
        Scale::Linear => v.is_finite().then_some(v),
        Scale::Log => (v > 0.0 && v.is_finite()).then(|| v.log10()),
    }
}

fn tick_label(v: f64, scale: Scale) -> String {
    match scale {
        Scale::Linear => format!("{v:.3}"),
        Scale::Log => format!("1e{v:.1}"),
    }
}

/// Standalone SVG line plot. Points that cannot be drawn on the chosen
/// scales (e.g. nonpositive values on a log axis) are skipped.
pub fn svg_plot(title: &str, x_label: &str, y_label: &str, series: &[Series], xs: Scale, ys: Scale) -> String {
    let (w, h, left, right, top, bottom) = (720.0, 480.0, 80.0, 20.0, 40.0, 60.0);
    let mapped: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter_map(|&(x, y)| Some((transform(x, xs)?, transform(y, ys)?)))
                .collect()
        })
        .collect();
    let all = mapped.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 <= 0.0 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 <= 0.0 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let py = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - left - right,
        h - top - bottom
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            px(xv),
            h - bottom + 18.0,
            tick_label(xv, xs)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            left - 6.0,
            py(yv) + 4.0,
            tick_label(yv, ys)
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#, w / 2.0, h - 16.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        h / 2.0,
        h / 2.0,
        escape(y_label)
    );
    for (i, (pts, ser)) in mapped.iter().zip(series).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        let ly = top + 16.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" font-family="sans-serif" font-size="12" fill="{color}" text-anchor="end">{}</text>"#,
            w - right - 8.0,
            escape(ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_csv_has_summary_row() {
        let report = SweepReport { rows: Vec::new(), exponent_alpha: 0.5, alpha_stderr: 0.01 };
        let mut buf = Vec::new();
        write_sweep(&mut buf, &report).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "nu,k,ell,m,Lambda,rate,c_effective,psi,alpha");
        assert_eq!(lines[1], ",,,,,,,,5.0000000000e-1");
    }

    #[test]
    fn svg_skips_nonpositive_on_log_axis() {
        let series = [Series { label: "a", points: vec![(0.0, 1.0), (1.0, 0.0), (2.0, 0.1)] }];
        let svg = svg_plot("t", "x", "y", &series, Scale::Linear, Scale::Log);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        let poly = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        assert_eq!(poly.matches(',').count(), 2);
    }
}
