//! CSV and SVG output.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::Vector3;

use crate::error::SimError;
use crate::runner::{Row, Summary};

pub const CSV_HEADER: [&str; 12] = [
    "run", "t", "filter", "px", "py", "pz", "vx", "vy", "vz", "pos_err", "vel_err", "energy",
];

pub const SUMMARY_HEADER: [&str; 8] = [
    "t",
    "filter",
    "mean_pos_err",
    "median_pos_err",
    "mean_vel_err",
    "median_vel_err",
    "mean_energy",
    "count",
];

/// 17 significant digits, which round-trips every `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn write_rows<W: Write>(rows: &[Row], w: W) -> Result<(), SimError> {
    let mut out = writer(w);
    out.write_record(CSV_HEADER)?;
    for r in rows {
        let mut rec = vec![r.run.to_string(), fmt_float(r.t), r.filter.name().to_string()];
        rec.extend(r.position.iter().chain(r.velocity.iter()).map(|x| fmt_float(*x)));
        rec.extend([r.pos_err, r.vel_err, r.energy].map(fmt_float));
        out.write_record(&rec)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_rows<R: Read>(r: R) -> Result<Vec<Row>, SimError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(SimError::Parse(format!("unexpected header {header:?}")));
    }
    let float = |s: &str| s.parse::<f64>().map_err(|e| SimError::Parse(format!("{s}: {e}")));
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let f: Vec<&str> = rec.iter().collect();
        if f.len() != CSV_HEADER.len() {
            return Err(SimError::Parse(format!("expected 12 fields, got {}", f.len())));
        }
        rows.push(Row {
            run: f[0].parse().map_err(|e| SimError::Parse(format!("run: {e}")))?,
            t: float(f[1])?,
            filter: f[2].parse()?,
            position: Vector3::new(float(f[3])?, float(f[4])?, float(f[5])?),
            velocity: Vector3::new(float(f[6])?, float(f[7])?, float(f[8])?),
            pos_err: float(f[9])?,
            vel_err: float(f[10])?,
            energy: float(f[11])?,
        });
    }
    Ok(rows)
}

pub fn write_summary<W: Write>(summary: &Summary, w: W) -> Result<(), SimError> {
    let mut out = writer(w);
    out.write_record(SUMMARY_HEADER)?;
    for (kind, c) in &summary.curves {
        for k in 0..c.t.len() {
            out.write_record([
                fmt_float(c.t[k]),
                kind.name().to_string(),
                fmt_float(c.mean_pos_err[k]),
                fmt_float(c.median_pos_err[k]),
                fmt_float(c.mean_vel_err[k]),
                fmt_float(c.median_vel_err[k]),
                fmt_float(c.mean_energy[k]),
                c.count[k].to_string(),
            ])?;
        }
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<(), SimError> {
    std::fs::write(path, contents).map_err(|e| SimError::io(path, e))
}

pub struct Series<'a> {
    pub name: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// A plain line chart. With `log_y`, non-positive values are dropped and
/// the axis is decades.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series<'_>], log_y: bool) -> String {
    let (w, h) = (760.0, 420.0);
    let (left, right, top, bottom) = (70.0, 150.0, 40.0, 50.0);
    let (pw, ph) = (w - left - right, h - top - bottom);

    let ty = |y: f64| if log_y { y.log10() } else { y };
    let usable = |x: f64, y: f64| x.is_finite() && y.is_finite() && (!log_y || y > 0.0);
    let mut xs = (f64::INFINITY, f64::NEG_INFINITY);
    let mut ys = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for (&x, &y) in s.x.iter().zip(s.y) {
            if usable(x, y) {
                xs = (xs.0.min(x), xs.1.max(x));
                ys = (ys.0.min(ty(y)), ys.1.max(ty(y)));
            }
        }
    }
    if !xs.0.is_finite() {
        xs = (0.0, 1.0);
        ys = (0.0, 1.0);
    }
    if log_y {
        ys = (ys.0.floor(), ys.1.ceil());
    }
    if xs.1 - xs.0 <= 0.0 {
        xs.1 = xs.0 + 1.0;
    }
    if ys.1 - ys.0 <= 0.0 {
        ys = (ys.0 - 0.5, ys.1 + 0.5);
    }
    let px = |x: f64| left + (x - xs.0) / (xs.1 - xs.0) * pw;
    let py = |y: f64| top + ph - (ty(y) - ys.0) / (ys.1 - ys.0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, left + pw / 2.0, escape(title));
    let _ = writeln!(
        svg,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );

    for i in 0..=5 {
        let x = xs.0 + (xs.1 - xs.0) * i as f64 / 5.0;
        let sx = px(x);
        let _ = writeln!(svg, r##"<line x1="{sx:.2}" y1="{top}" x2="{sx:.2}" y2="{}" stroke="#dddddd"/>"##, top + ph);
        let _ = writeln!(svg, r#"<text x="{sx:.2}" y="{}" text-anchor="middle">{x:.2}</text>"#, top + ph + 18.0);
    }
    let ticks: Vec<f64> = if log_y {
        (ys.0 as i32..=ys.1 as i32).map(|e| 10f64.powi(e)).collect()
    } else {
        (0..=5).map(|i| ys.0 + (ys.1 - ys.0) * i as f64 / 5.0).collect()
    };
    for y in ticks {
        let sy = py(y);
        let label = if log_y { format!("1e{}", y.log10().round() as i32) } else { format!("{y:.3}") };
        let _ = writeln!(svg, r##"<line x1="{left}" y1="{sy:.2}" x2="{}" y2="{sy:.2}" stroke="#dddddd"/>"##, left + pw);
        let _ = writeln!(svg, r#"<text x="{}" y="{:.2}" text-anchor="end">{label}</text>"#, left - 6.0, sy + 4.0);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, left + pw / 2.0, h - 12.0, escape(x_label));
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        top + ph / 2.0,
        escape(y_label)
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut segments: Vec<Vec<String>> = vec![Vec::new()];
        for (&x, &y) in s.x.iter().zip(s.y) {
            if usable(x, y) {
                segments.last_mut().unwrap().push(format!("{:.2},{:.2}", px(x), py(y)));
            } else if !segments.last().unwrap().is_empty() {
                segments.push(Vec::new());
            }
        }
        for seg in segments.iter().filter(|s| s.len() > 1) {
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                seg.join(" ")
            );
        }
        let ly = top + 16.0 + 18.0 * i as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(svg, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(s.name));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes `position_error.svg`, `velocity_error.svg` and `energy.svg`.
pub fn write_charts(summary: &Summary, dir: &Path) -> Result<(), SimError> {
    type Pick = fn(&crate::runner::Curve) -> &[f64];
    let charts: [(&str, &str, &str, Pick); 3] = [
        ("position_error.svg", "Mean position error", "m", |c| &c.mean_pos_err),
        ("velocity_error.svg", "Mean velocity error", "m/s", |c| &c.mean_vel_err),
        ("energy.svg", "Mean filter energy", "energy", |c| &c.mean_energy),
    ];
    for (file, title, unit, pick) in charts {
        let series: Vec<Series<'_>> = summary
            .curves
            .iter()
            .map(|(k, c)| Series { name: k.name(), x: &c.t, y: pick(c) })
            .collect();
        let svg = line_chart(title, "time (s)", unit, &series, true);
        write_file(&dir.join(file), svg.as_bytes())?;
    }
    Ok(())
}
