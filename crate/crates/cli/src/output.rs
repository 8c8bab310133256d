//! CSV and SVG emission and all-or-nothing artifact writes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// A named file produced by a pipeline, held in memory until the run succeeds.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    pub fn new(name: impl Into<String>, contents: impl Into<String>) -> Self {
        Self { name: name.into(), contents: contents.into() }
    }
}

/// CSV document: `#` metadata lines, a header row, then data rows.
#[derive(Clone, Debug)]
pub struct Csv {
    meta: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Self {
        Self { meta: Vec::new(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn row(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.columns.len(), "row width must match the header");
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}: {v}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }
}

/// Formats a float for CSV; non-finite values become `nan`/`inf`.
pub fn cell(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.10e}")
    }
}

/// Heat map of `values` (row-major, `ny` rows from top) as a grid of rects.
/// Missing values are drawn grey.
pub fn heat_map_svg(title: &str, nx: usize, ny: usize, values: &[Option<f64>]) -> String {
    let cell_px = 40.0;
    let (w, h) = (nx as f64 * cell_px, ny as f64 * cell_px);
    let finite: Vec<f64> = values.iter().flatten().copied().filter(|v| v.is_finite()).collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        w,
        h + 30.0,
        w,
        h + 30.0
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, escape(title));
    for j in 0..ny {
        for i in 0..nx {
            let fill = match values[j * nx + i] {
                Some(v) if v.is_finite() => {
                    let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
                    ramp(t)
                }
                _ => "#999999".to_string(),
            };
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{cell_px}" height="{cell_px}" fill="{fill}"/>"#,
                i as f64 * cell_px,
                j as f64 * cell_px
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="4" y="{}" font-size="12" font-family="sans-serif">min {} max {}</text>"#,
        h + 20.0,
        fmt_short(lo),
        fmt_short(hi)
    );
    s.push_str("</svg>\n");
    s
}

/// Line plot of `(x, y)` points with a log-scaled y axis.
pub fn line_plot_svg(title: &str, points: &[(f64, f64)]) -> String {
    let (w, h, pad) = (480.0, 320.0, 40.0);
    let pts: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.1 > 0.0 && p.1.is_finite()).collect();
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    if !pts.is_empty() {
        let (x0, x1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.0), a.1.max(p.0)));
        let (y0, y1) =
            pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.1.ln()), a.1.max(p.1.ln())));
        let sx = |x: f64| pad + if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.5 } * (w - 2.0 * pad);
        let sy = |y: f64| h - pad - if y1 > y0 { (y.ln() - y0) / (y1 - y0) } else { 0.5 } * (h - 2.0 * pad);
        let coords: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#, coords.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{pad}" y="{}" font-size="12" font-family="sans-serif">x {}..{}, y {}..{} (log)</text>"#,
            h - 10.0,
            fmt_short(x0),
            fmt_short(x1),
            fmt_short(y0.exp()),
            fmt_short(y1.exp())
        );
    }
    s.push_str("</svg>\n");
    s
}

fn fmt_short(v: f64) -> String {
    if v.is_finite() { format!("{v:.3e}") } else { "n/a".into() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Blue to red through white.
fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let (r, g, b) = if t < 0.5 {
        let u = t / 0.5;
        (u, u, 1.0)
    } else {
        let u = (t - 0.5) / 0.5;
        (1.0, 1.0 - u, 1.0 - u)
    };
    format!("#{:02x}{:02x}{:02x}", (r * 255.0).round() as u8, (g * 255.0).round() as u8, (b * 255.0).round() as u8)
}

/// Writes every artifact into `dir` or none of them. Files are first written
/// to hidden temporaries, then renamed; on failure everything created by this
/// call is removed.
pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>> {
    let created_dir = !dir.exists();
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let mut temps: Vec<PathBuf> = Vec::new();
    let mut finals: Vec<PathBuf> = Vec::new();
    let result = (|| -> Result<()> {
        for a in artifacts {
            let tmp = dir.join(format!(".{}.partial", a.name));
            temps.push(tmp.clone());
            fs::write(&tmp, &a.contents).with_context(|| format!("cannot write {}", tmp.display()))?;
        }
        for (a, tmp) in artifacts.iter().zip(&temps) {
            let dest = dir.join(&a.name);
            fs::rename(tmp, &dest).with_context(|| format!("cannot move output into {}", dest.display()))?;
            finals.push(dest);
        }
        Ok(())
    })();
    if let Err(e) = result {
        for p in temps.iter().chain(&finals) {
            let _ = fs::remove_file(p);
        }
        if created_dir {
            let _ = fs::remove_dir(dir);
        }
        return Err(e);
    }
    Ok(finals)
}
