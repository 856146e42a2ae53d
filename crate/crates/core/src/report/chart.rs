//! Deterministic log-log roofline charts as SVG.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precision::ComputePrecision;
use crate::roofline::{classify, phi, Basis, HardwareProfile, PhiSpace, Regime, RidgePoint, RooflinePoint};
use crate::scenario::Scenario;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 240.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;

/// One bandwidth roof plus one compute roof.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CeilingSpec {
    pub label: String,
    pub bandwidth_gbps: f64,
    pub peak_gflops: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Basis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<ComputePrecision>,
}

impl CeilingSpec {
    pub fn from_profile(profile: &HardwareProfile, precision: ComputePrecision, basis: Basis) -> Result<Self> {
        let r = crate::roofline::ridge(profile, precision, basis)?;
        Ok(CeilingSpec {
            label: format!("{} {basis} {precision}", profile.name),
            bandwidth_gbps: r.bandwidth,
            peak_gflops: r.pi,
            basis: Some(basis),
            precision: Some(precision),
        })
    }

    pub fn ridge(&self) -> RidgePoint {
        RidgePoint {
            oi_r: self.peak_gflops / self.bandwidth_gbps,
            pi: self.peak_gflops,
            bandwidth: self.bandwidth_gbps,
            basis: self.basis.unwrap_or(Basis::Measured),
            precision: self.precision.unwrap_or(ComputePrecision::Fp32),
        }
    }

    fn attainable(&self, oi: f64) -> f64 {
        self.peak_gflops.min(oi * self.bandwidth_gbps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    #[serde(default)]
    pub title: String,
    pub ceilings: Vec<CeilingSpec>,
    #[serde(default)]
    pub points: Vec<RooflinePoint>,
    /// Draw each point's Φ segment against `ceilings[phi_ceiling]`.
    #[serde(default)]
    pub phi_annotations: bool,
    #[serde(default)]
    pub phi_ceiling: usize,
    /// Per-point ceiling index for Φ segments; empty means `phi_ceiling` for all.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub point_ceilings: Vec<usize>,
}

impl ChartSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        crate::error::from_json_str(text)
    }
}

/// Maps data coordinates onto the canvas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axes {
    /// Decade exponents of the x range.
    pub x_decades: (i32, i32),
    pub y_decades: (i32, i32),
}

impl Axes {
    fn fit(xs: &[f64], ys: &[f64]) -> Axes {
        let range = |v: &[f64]| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min).log10().floor() as i32 - 1;
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max).log10().ceil() as i32 + 1;
            (lo, hi.max(lo + 1))
        };
        Axes { x_decades: range(xs), y_decades: range(ys) }
    }

    pub fn for_spec(spec: &ChartSpec) -> Axes {
        let mut xs: Vec<f64> = spec.points.iter().map(|p| p.oi).collect();
        let mut ys: Vec<f64> = spec.points.iter().map(|p| p.perf_gflops).collect();
        for c in &spec.ceilings {
            let r = c.ridge();
            xs.push(r.oi_r);
            ys.push(r.pi);
        }
        // keep the sloped roofs visible across the data
        let x_min = xs.iter().copied().fold(f64::INFINITY, f64::min);
        for c in &spec.ceilings {
            ys.push(c.attainable(x_min));
        }
        Axes::fit(&xs, &ys)
    }

    fn plot_w() -> f64 {
        WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    }

    fn plot_h() -> f64 {
        HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    }

    pub fn x_bounds(&self) -> (f64, f64) {
        (10f64.powi(self.x_decades.0), 10f64.powi(self.x_decades.1))
    }

    pub fn y_bounds(&self) -> (f64, f64) {
        (10f64.powi(self.y_decades.0), 10f64.powi(self.y_decades.1))
    }

    /// Canvas position of (oi, gflops).
    pub fn map(&self, oi: f64, gflops: f64) -> (f64, f64) {
        let (x0, x1) = (self.x_decades.0 as f64, self.x_decades.1 as f64);
        let (y0, y1) = (self.y_decades.0 as f64, self.y_decades.1 as f64);
        let px = MARGIN_LEFT + (oi.log10() - x0) / (x1 - x0) * Self::plot_w();
        let py = MARGIN_TOP + (y1 - gflops.log10()) / (y1 - y0) * Self::plot_h();
        (px, py)
    }
}

/// Fixed two-decimal coordinate formatting.
pub fn fmt_coord(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn scenario_color(s: Option<Scenario>) -> &'static str {
    match s {
        Some(Scenario::Siso) => "#1f77b4",
        Some(Scenario::Silo) => "#ff7f0e",
        Some(Scenario::Liso) => "#2ca02c",
        Some(Scenario::Lilo) => "#d62728",
        None => "#7f7f7f",
    }
}

const CEILING_COLORS: [&str; 4] = ["#1f3b73", "#b22222", "#2e7d32", "#6a1b9a"];

fn line(out: &mut String, class: &str, a: (f64, f64), b: (f64, f64), extra: &str) {
    let _ = writeln!(
        out,
        r#"<line class="{class}" x1="{}" y1="{}" x2="{}" y2="{}"{extra}/>"#,
        fmt_coord(a.0),
        fmt_coord(a.1),
        fmt_coord(b.0),
        fmt_coord(b.1)
    );
}

/// Renders `spec`; identical inputs give byte-identical output.
pub fn render_chart(spec: &ChartSpec) -> Result<String> {
    if spec.ceilings.is_empty() {
        return Err(Error::Render("chart needs at least one ceiling".into()));
    }
    for c in &spec.ceilings {
        if !(c.bandwidth_gbps > 0.0 && c.peak_gflops > 0.0) {
            return Err(Error::Render(format!("ceiling `{}` has a non-positive value", c.label)));
        }
    }
    for p in &spec.points {
        if !(p.oi > 0.0 && p.perf_gflops > 0.0 && p.oi.is_finite() && p.perf_gflops.is_finite()) {
            return Err(Error::Render(format!(
                "point `{}` has a non-positive coordinate (oi={}, perf={})",
                p.label, p.oi, p.perf_gflops
            )));
        }
    }
    if spec.phi_annotations {
        if spec.phi_ceiling >= spec.ceilings.len() {
            return Err(Error::Render(format!("phi_ceiling {} is out of range", spec.phi_ceiling)));
        }
        if !spec.point_ceilings.is_empty() && spec.point_ceilings.len() != spec.points.len() {
            return Err(Error::Render("point_ceilings must have one entry per point".into()));
        }
        if let Some(i) = spec.point_ceilings.iter().find(|&&i| i >= spec.ceilings.len()) {
            return Err(Error::Render(format!("point ceiling index {i} is out of range")));
        }
    }

    let axes = Axes::for_spec(spec);
    let (x_lo, x_hi) = axes.x_bounds();
    let (y_lo, _) = axes.y_bounds();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    if !spec.title.is_empty() {
        let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, fmt_coord(MARGIN_LEFT + Axes::plot_w() / 2.0), escape(&spec.title));
    }

    // grid and decade ticks
    let _ = writeln!(out, r##"<g class="grid" stroke="#dddddd" stroke-width="1">"##);
    for d in axes.x_decades.0..=axes.x_decades.1 {
        let x = 10f64.powi(d);
        let (px, top) = axes.map(x, axes.y_bounds().1);
        let (_, bottom) = axes.map(x, y_lo);
        line(&mut out, "gridline", (px, top), (px, bottom), "");
    }
    for d in axes.y_decades.0..=axes.y_decades.1 {
        let y = 10f64.powi(d);
        let (left, py) = axes.map(x_lo, y);
        let (right, _) = axes.map(x_hi, y);
        line(&mut out, "gridline", (left, py), (right, py), "");
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<g class="ticks" fill="black">"#);
    for d in axes.x_decades.0..=axes.x_decades.1 {
        let (px, py) = axes.map(10f64.powi(d), y_lo);
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">1e{d}</text>"#, fmt_coord(px), fmt_coord(py + 16.0));
    }
    for d in axes.y_decades.0..=axes.y_decades.1 {
        let (px, py) = axes.map(x_lo, 10f64.powi(d));
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">1e{d}</text>"#, fmt_coord(px - 6.0), fmt_coord(py + 4.0));
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">Operational intensity (FLOPs/Byte)</text>"#,
        fmt_coord(MARGIN_LEFT + Axes::plot_w() / 2.0),
        fmt_coord(HEIGHT - 16.0)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">Performance (GFLOPS)</text>"#,
        fmt_coord(MARGIN_TOP + Axes::plot_h() / 2.0),
        fmt_coord(MARGIN_TOP + Axes::plot_h() / 2.0)
    );

    // roofs
    for (i, c) in spec.ceilings.iter().enumerate() {
        let color = CEILING_COLORS[i % CEILING_COLORS.len()];
        let r = c.ridge();
        let start_x = x_lo.max(y_lo / c.bandwidth_gbps);
        let _ = writeln!(out, r#"<g class="ceiling" data-label="{}" stroke="{color}" stroke-width="2">"#, escape(&c.label));
        line(&mut out, "bandwidth", axes.map(start_x, start_x * c.bandwidth_gbps), axes.map(r.oi_r, r.pi), "");
        line(&mut out, "peak", axes.map(r.oi_r, r.pi), axes.map(x_hi, r.pi), "");
        line(&mut out, "ridge", axes.map(r.oi_r, r.pi), axes.map(r.oi_r, y_lo), r#" stroke-dasharray="6 4" stroke-width="1""#);
        let (rx, ry) = axes.map(r.oi_r, y_lo);
        let _ = writeln!(
            out,
            r#"<text class="ridge-label" x="{}" y="{}" stroke="none" fill="{color}" font-size="11">ridge {:.2}</text>"#,
            fmt_coord(rx + 4.0),
            fmt_coord(ry - 6.0 - 12.0 * i as f64),
            r.oi_r
        );
        let _ = writeln!(out, "</g>");
    }

    if spec.phi_annotations {
        let _ = writeln!(out, r##"<g class="phi-segments" stroke="#555555" stroke-width="1" stroke-dasharray="2 3">"##);
        for (i, p) in spec.points.iter().enumerate() {
            let c = spec.point_ceilings.get(i).copied().unwrap_or(spec.phi_ceiling);
            let r = spec.ceilings[c].ridge();
            let value = phi(p, &r, PhiSpace::Raw).value;
            let target = match classify(p.oi, &r) {
                Regime::MemoryBound => (r.oi_r, r.pi),
                Regime::ComputeBound => (p.oi, r.pi),
            };
            let extra = format!(r#" data-label="{}" data-phi="{value}""#, escape(&p.label));
            line(&mut out, "phi", axes.map(p.oi, p.perf_gflops), axes.map(target.0, target.1), &extra);
        }
        let _ = writeln!(out, "</g>");
    }

    let _ = writeln!(out, r#"<g class="points">"#);
    for p in &spec.points {
        let (px, py) = axes.map(p.oi, p.perf_gflops);
        let under_some_roof = spec
            .ceilings
            .iter()
            .any(|c| p.perf_gflops <= c.attainable(p.oi) * (1.0 + 1e-9));
        let color = scenario_color(p.scenario);
        let (class, stroke) = if under_some_roof { ("point", color) } else { ("point above-ceiling", "#ff0000") };
        let fill = match p.provenance {
            crate::roofline::Provenance::Measured => color,
            crate::roofline::Provenance::Predicted => "none",
        };
        let _ = writeln!(
            out,
            r#"<circle class="{class}" cx="{}" cy="{}" r="5" fill="{fill}" stroke="{stroke}" stroke-width="2"><title>{} (OI {:.4}, {:.2} GFLOPS)</title></circle>"#,
            fmt_coord(px),
            fmt_coord(py),
            escape(&p.label),
            p.oi,
            p.perf_gflops
        );
    }
    let _ = writeln!(out, "</g>");

    // legend
    let lx = WIDTH - MARGIN_RIGHT + 16.0;
    let mut ly = MARGIN_TOP + 10.0;
    let _ = writeln!(out, r#"<g class="legend">"#);
    for (i, c) in spec.ceilings.iter().enumerate() {
        let color = CEILING_COLORS[i % CEILING_COLORS.len()];
        line(&mut out, "legend-key", (lx, ly), (lx + 18.0, ly), &format!(r#" stroke="{color}" stroke-width="2""#));
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, fmt_coord(lx + 24.0), fmt_coord(ly + 4.0), escape(&c.label));
        ly += 18.0;
    }
    let mut seen: Vec<Option<Scenario>> = spec.points.iter().map(|p| p.scenario).collect();
    seen.sort();
    seen.dedup();
    for s in seen {
        let _ = writeln!(out, r#"<circle cx="{}" cy="{}" r="5" fill="{}"/>"#, fmt_coord(lx + 9.0), fmt_coord(ly), scenario_color(s));
        let name = s.map(|s| s.as_str()).unwrap_or("unlabeled");
        let _ = writeln!(out, r#"<text x="{}" y="{}">{name}</text>"#, fmt_coord(lx + 24.0), fmt_coord(ly + 4.0));
        ly += 18.0;
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    Ok(out)
}
