//! Self-contained SVG figures and CSV exports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiment::ComplexityCurve;
use crate::spectrum::SweepResult;
use crate::stats::{unfold, UnfoldParams};

const WIDTH: f64 = 640.0;
const PANEL_HEIGHT: f64 = 360.0;
const MARGIN: f64 = 60.0;

struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        Axis { lo, hi, px_lo, px_hi }
    }

    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

fn ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..=count).map(|k| lo + (hi - lo) * k as f64 / count as f64).collect()
}

fn frame(svg: &mut String, top: f64, x: &Axis, y: &Axis, x_label: &str, y_label: &str) {
    let bottom = top + PANEL_HEIGHT - MARGIN;
    let _ = writeln!(
        svg,
        r#"<rect x="{l}" y="{t}" width="{w}" height="{h}" fill="none" stroke="black"/>"#,
        l = MARGIN,
        t = top + MARGIN / 2.0,
        w = WIDTH - 1.5 * MARGIN,
        h = bottom - top - MARGIN / 2.0
    );
    for v in ticks(x.lo, x.hi, 8) {
        let px = x.map(v);
        let _ = writeln!(
            svg,
            r#"<text x="{px:.1}" y="{y:.1}" font-size="11" text-anchor="middle">{v:.2}</text>"#,
            y = bottom + 15.0
        );
    }
    for v in ticks(y.lo, y.hi, 5) {
        let py = y.map(v);
        let _ = writeln!(
            svg,
            r#"<text x="{x:.1}" y="{py:.1}" font-size="11" text-anchor="end">{v:.3}</text>"#,
            x = MARGIN - 5.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{x:.1}" y="{y:.1}" font-size="13" text-anchor="middle">{x_label}</text>"#,
        x = WIDTH / 2.0,
        y = bottom + 35.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{y:.1}" font-size="13" text-anchor="middle" transform="rotate(-90 15 {y:.1})">{y_label}</text>"#,
        y = top + PANEL_HEIGHT / 2.0
    );
}

/// Mean maximal Brody parameter against `f`, with standard-error bars, and
/// optionally a second panel with the median DPLL cost.
pub fn curve_svg(curve: &ComplexityCurve, cost_panel: bool) -> Result<String> {
    if curve.is_empty() {
        return Err(Error::InvalidInput("cannot plot an empty curve".into()));
    }
    let panels = if cost_panel { 2.0 } else { 1.0 };
    let height = PANEL_HEIGHT * panels;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let f_lo = curve.records.iter().map(|r| r.f).fold(f64::INFINITY, f64::min);
    let f_hi = curve.records.iter().map(|r| r.f).fold(f64::NEG_INFINITY, f64::max);
    let x = Axis::new(f_lo.min(0.0), f_hi, MARGIN + 10.0, WIDTH - MARGIN / 2.0 - 10.0);
    let q_hi = curve
        .records
        .iter()
        .map(|r| r.mean_q_max + r.stderr_q_max)
        .fold(0.0, f64::max)
        .max(1.0);
    let y = Axis::new(0.0, q_hi, PANEL_HEIGHT - MARGIN - 5.0, MARGIN / 2.0 + 5.0);
    frame(&mut svg, 0.0, &x, &y, "clause-to-variable ratio f", "mean max Brody q");

    let path: Vec<String> = curve
        .records
        .iter()
        .map(|r| format!("{:.2},{:.2}", x.map(r.f), y.map(r.mean_q_max)))
        .collect();
    let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="steelblue"/>"#, path.join(" "));
    for r in &curve.records {
        let (px, py) = (x.map(r.f), y.map(r.mean_q_max));
        let (lo, hi) = (y.map(r.mean_q_max - r.stderr_q_max), y.map(r.mean_q_max + r.stderr_q_max));
        let _ = writeln!(
            svg,
            r#"<line class="errorbar" x1="{px:.2}" y1="{lo:.2}" x2="{px:.2}" y2="{hi:.2}" stroke="black"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<circle class="marker" cx="{px:.2}" cy="{py:.2}" r="3.5" fill="steelblue"><title>f={} q={:.4}±{:.4}</title></circle>"#,
            r.f, r.mean_q_max, r.stderr_q_max
        );
    }

    if cost_panel {
        let c_hi = curve.records.iter().map(|r| r.median_dpll).fold(0.0, f64::max).max(1.0);
        let y = Axis::new(0.0, c_hi, 2.0 * PANEL_HEIGHT - MARGIN - 5.0, PANEL_HEIGHT + MARGIN / 2.0 + 5.0);
        frame(&mut svg, PANEL_HEIGHT, &x, &y, "clause-to-variable ratio f", "median DPLL nodes");
        for r in &curve.records {
            let _ = writeln!(
                svg,
                r#"<rect class="cost-marker" x="{:.2}" y="{:.2}" width="6" height="6" fill="firebrick"/>"#,
                x.map(r.f) - 3.0,
                y.map(r.median_dpll) - 3.0
            );
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Unfolded levels against `s`, one polyline per level index in
/// `level_window` (clamped to the retained levels).
pub fn spectrum_svg(sweep: &SweepResult, params: &UnfoldParams, level_window: (usize, usize)) -> Result<String> {
    let unfolded = sweep
        .spectra
        .iter()
        .map(|sp| unfold(&sp.eigenvalues, params).map(|u| (sp.s, u.levels)))
        .collect::<Result<Vec<_>>>()?;
    let levels = unfolded.iter().map(|(_, l)| l.len()).min().unwrap_or(0);
    let (first, last) = (level_window.0.min(levels), level_window.1.min(levels));
    if first >= last {
        return Err(Error::InvalidParameter("empty level window".into()));
    }
    let values = unfolded.iter().flat_map(|(_, l)| l[first..last].iter().copied());
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let x = Axis::new(0.0, 1.0, MARGIN + 10.0, WIDTH - MARGIN / 2.0 - 10.0);
    let y = Axis::new(lo, hi, PANEL_HEIGHT - MARGIN - 5.0, MARGIN / 2.0 + 5.0);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{PANEL_HEIGHT}" viewBox="0 0 {WIDTH} {PANEL_HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    frame(&mut svg, 0.0, &x, &y, "interpolation s", "unfolded level");
    for level in first..last {
        let pts: Vec<String> = unfolded
            .iter()
            .map(|(s, l)| format!("{:.2},{:.2}", x.map(*s), y.map(l[level])))
            .collect();
        let _ = writeln!(svg, r#"<polyline class="level" points="{}" fill="none" stroke="black" stroke-width="0.7"/>"#, pts.join(" "));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotFiles {
    pub csv: PathBuf,
    pub svg: PathBuf,
}

/// Write `curve.csv` and `fig2.svg` into `dir`.
pub fn emit_plots(curve: &ComplexityCurve, dir: &Path, cost_panel: bool) -> Result<PlotFiles> {
    let svg = curve_svg(curve, cost_panel)?;
    std::fs::create_dir_all(dir)?;
    let files = PlotFiles {
        csv: dir.join("curve.csv"),
        svg: dir.join("fig2.svg"),
    };
    std::fs::write(&files.csv, curve.to_csv())?;
    std::fs::write(&files.svg, svg)?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::CurveRecord;

    fn curve(points: usize) -> ComplexityCurve {
        ComplexityCurve {
            records: (0..points)
                .map(|i| CurveRecord {
                    f: 1.0 + i as f64,
                    m: 8 * (i + 1),
                    mean_q_max: 0.2 * i as f64,
                    stderr_q_max: 0.01,
                    median_dpll: 3.0,
                    sat_fraction: 1.0,
                    count: 10,
                })
                .collect(),
        }
    }

    #[test]
    fn two_point_curve_has_two_markers() {
        let svg = curve_svg(&curve(2), false).unwrap();
        assert_eq!(svg.matches(r#"class="marker""#).count(), 2);
        let with_cost = curve_svg(&curve(2), true).unwrap();
        assert_eq!(with_cost.matches(r#"class="marker""#).count(), 2);
        assert_eq!(with_cost.matches(r#"class="cost-marker""#).count(), 2);
    }

    #[test]
    fn empty_curve_is_an_error() {
        assert!(curve_svg(&ComplexityCurve::default(), false).is_err());
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_plots(&ComplexityCurve::default(), dir.path(), false).is_err());
    }

    #[test]
    fn written_csv_parses_back() {
        let dir = tempfile::tempdir().unwrap();
        let c = curve(3);
        let files = emit_plots(&c, dir.path(), true).unwrap();
        let text = std::fs::read_to_string(files.csv).unwrap();
        assert_eq!(ComplexityCurve::from_csv(&text).unwrap(), c);
        assert!(std::fs::read_to_string(files.svg).unwrap().starts_with("<svg"));
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("blocker");
        std::fs::write(&file, "x").unwrap();
        assert!(matches!(emit_plots(&curve(2), &file.join("sub"), false), Err(Error::Io(_))));
    }
}
