//! CSV and SVG writers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use phasevar_core::SchemeModel;

use crate::config::{parse_scheme, PlotKind};
use crate::sweep::SweepRecord;

pub const CSV_HEADER: [&str; 10] = [
    "scheme", "method", "nbar", "variance", "z", "mu", "n0", "cutoff", "tail_mass", "notes",
];

/// 17 significant digits, so values round-trip exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn write_csv<W: Write>(records: &[SweepRecord], sink: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.scheme.clone(),
            r.method.clone(),
            fmt_f64(r.nbar),
            opt(r.variance),
            opt(r.z),
            opt(r.mu),
            opt(r.n0),
            r.cutoff.map(|c| c.to_string()).unwrap_or_default(),
            opt(r.tail_mass),
            r.notes.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes to `path`, or stdout when `path` is `None`.
pub fn emit_csv(records: &[SweepRecord], path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            let f = fs::File::create(p).with_context(|| format!("writing {}", p.display()))?;
            write_csv(records, std::io::BufWriter::new(f))
        }
        None => write_csv(records, std::io::stdout().lock()),
    }
}

const W: f64 = 800.0;
const H: f64 = 560.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLOURS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if log {
            (lo, hi) = (lo.floor(), hi.ceil());
        }
        if hi - lo < 1e-12 {
            let pad = if log { 1.0 } else { lo.abs().max(1.0) * 0.1 };
            (lo, hi) = (lo - pad, hi + pad);
        } else if !log {
            let pad = 0.05 * (hi - lo);
            (lo, hi) = (lo - pad, hi + pad);
        }
        Self { lo, hi, log }
    }

    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let step = ((self.hi - self.lo) / 8.0).ceil().max(1.0) as i64;
            (self.lo as i64..=self.hi as i64)
                .step_by(step as usize)
                .map(|k| (10f64.powi(k as i32), format!("1e{k}")))
                .collect()
        } else {
            (0..=5)
                .map(|i| {
                    let v = self.lo + (self.hi - self.lo) * i as f64 / 5.0;
                    (v, format!("{v:.3}"))
                })
                .collect()
        }
    }
}

fn px(ax: &Axis, v: f64) -> f64 {
    LEFT + ax.frac(v) * (W - LEFT - RIGHT)
}

fn py(ay: &Axis, v: f64) -> f64 {
    H - BOTTOM - ay.frac(v) * (H - TOP - BOTTOM)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Static SVG figure: one polyline per (scheme, method) series; the z plot
/// also draws each scheme's asymptote `√(cp(p+1))` as a horizontal line.
pub fn render_plot(records: &[SweepRecord], kind: PlotKind) -> String {
    let value = |r: &SweepRecord| match kind {
        PlotKind::LoglogVariance => r.variance.filter(|v| *v > 0.0),
        PlotKind::ZVsNbar => r.z,
    };
    let mut series: BTreeMap<(String, String), Vec<(f64, f64)>> = BTreeMap::new();
    for r in records {
        if let Some(v) = value(r).filter(|v| v.is_finite()) {
            series.entry((r.scheme.clone(), r.method.clone())).or_default().push((r.nbar, v));
        }
    }
    let asymptotes: Vec<(String, f64)> = if kind == PlotKind::ZVsNbar {
        let mut names: Vec<&String> = records.iter().map(|r| &r.scheme).collect();
        names.dedup();
        names.sort();
        names.dedup();
        names
            .into_iter()
            .filter_map(|n| {
                let s: SchemeModel = parse_scheme(n, None).ok()?;
                let t = s.tail().filter(|_| !s.is_canonical())?;
                Some((n.clone(), t.z_asymptote()))
            })
            .collect()
    } else {
        Vec::new()
    };

    let ax = Axis::fit(series.values().flatten().map(|p| p.0), true);
    let ay = Axis::fit(
        series.values().flatten().map(|p| p.1).chain(asymptotes.iter().map(|a| a.1)),
        kind == PlotKind::LoglogVariance,
    );

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let _ = writeln!(
        svg,
        r#"<rect class="frame" x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for (v, label) in ax.ticks() {
        let x = px(&ax, v);
        let _ = writeln!(svg, r##"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"##, y0 + 18.0);
    }
    for (v, label) in ay.ticks() {
        let y = py(&ay, v);
        let _ = writeln!(svg, r##"<text x="{:.2}" y="{y:.2}" text-anchor="end">{label}</text>"##, x0 - 6.0);
    }
    let ylabel = match kind {
        PlotKind::LoglogVariance => "phase variance",
        PlotKind::ZVsNbar => "z",
    };
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">mean photon number</text>"#,
        (x0 + x1) / 2.0,
        H - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{ylabel}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    for (i, (name, z)) in asymptotes.iter().enumerate() {
        let y = py(&ay, *z);
        let colour = COLOURS[i % COLOURS.len()];
        let _ = writeln!(
            svg,
            r#"<line class="asymptote" data-scheme="{}" data-value="{z}" x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="{colour}" stroke-dasharray="6 4"/>"#,
            escape(name)
        );
    }
    for (i, ((scheme, method), pts)) in series.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(&ax, x), py(&ay, y))).collect();
        let label = escape(&format!("{scheme} {method}"));
        let _ = writeln!(
            svg,
            r#"<polyline data-series="{label}" fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
        let ly = TOP + 16.0 * (i as f64 + 1.0);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{ly:.2}" fill="{colour}">{label}</text>"#,
            x1 + 10.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn emit_plot(records: &[SweepRecord], path: &Path, kind: PlotKind) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, render_plot(records, kind)).with_context(|| format!("writing {}", path.display()))
}
