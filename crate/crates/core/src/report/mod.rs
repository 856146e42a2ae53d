//! Sweeps, gap analysis, charts, tables and the analysis bundle tying them together.

mod chart;
mod compare;
mod export;
mod gap;
mod sweep;

use std::path::{Path, PathBuf};

pub use chart::{fmt_coord, render_chart, scenario_color, Axes, CeilingSpec, ChartSpec, HEIGHT, WIDTH};
pub use compare::{compare_phi, incomparability, pair_points, phase_of, PhiComparison};
pub use export::{export_csv, export_phi_csv, PhiPair, PHI_HEADER, POINTS_HEADER};
pub use gap::{gap_analysis, ComputeGap, GapReport};
pub use sweep::{run_sweep, ScenarioShapes, SweepSpec, SweepValues};

use crate::arch::ArchConfig;
use crate::error::{Error, Result};
use crate::ingest::{join, precision_from_quant_label, JoinOptions, RunRecord};
use crate::precision::ComputePrecision;
use crate::roofline::{phi, ridge, Basis, HardwareProfile, PhiSpace, RidgePoint, RooflinePoint};

pub const POINTS_FILE: &str = "points.csv";
pub const PHI_FILE: &str = "phi.csv";
pub const GAPS_FILE: &str = "gaps.json";
pub const CHART_FILE: &str = "roofline.svg";
/// Input for `plot`, so a report's chart can be re-rendered.
pub const CHART_SPEC_FILE: &str = "chart.json";

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOptions {
    pub join: JoinOptions,
    pub basis: Basis,
    /// Compute ceiling for every point; `None` picks it from each run's weight format.
    pub ceiling: Option<ComputePrecision>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions { join: JoinOptions::default(), basis: Basis::Measured, ceiling: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub points: Vec<RooflinePoint>,
    pub ridges: Vec<RidgePoint>,
    pub phis: Vec<PhiPair>,
    pub gaps: GapReport,
    pub chart: ChartSpec,
}

fn ridge_index(ridges: &mut Vec<RidgePoint>, r: RidgePoint) -> usize {
    match ridges.iter().position(|x| x.precision == r.precision && x.basis == r.basis) {
        Some(i) => i,
        None => {
            ridges.push(r);
            ridges.len() - 1
        }
    }
}

/// Joins every run against `arch` and scores it against `profile`.
pub fn analyze(
    records: &[RunRecord],
    arch: &ArchConfig,
    profile: &HardwareProfile,
    opts: &AnalyzeOptions,
) -> Result<Analysis> {
    let mut points = Vec::new();
    let mut ridges: Vec<RidgePoint> = Vec::new();
    let mut point_ceilings = Vec::new();
    let mut phis = Vec::new();
    for record in records {
        record.validate()?;
        let joined = join(record, arch, &opts.join)?;
        let key = match opts.ceiling {
            Some(c) => c,
            None => precision_from_quant_label(&record.quant_label)?.compute_key(),
        };
        let r = ridge(profile, key, opts.basis)?;
        let idx = ridge_index(&mut ridges, r);
        for p in [joined.prefill_point, joined.decode_point].into_iter().flatten() {
            let p = p.classified(&r);
            phis.push(PhiPair { raw: phi(&p, &r, PhiSpace::Raw), log10: phi(&p, &r, PhiSpace::Log10) });
            point_ceilings.push(idx);
            points.push(p);
        }
    }
    let clamped = phis.iter().filter(|p| p.raw.above_ceiling).count();
    if clamped > 0 {
        log::warn!(
            "{clamped} of {} points exceed their {} compute peak on `{}`; their potential is clamped to 0",
            points.len(),
            opts.basis,
            profile.name
        );
    }
    let ceilings = ridges
        .iter()
        .map(|r| CeilingSpec {
            label: format!("{} {} {}", profile.name, r.basis, r.precision),
            bandwidth_gbps: r.bandwidth,
            peak_gflops: r.pi,
            basis: Some(r.basis),
            precision: Some(r.precision),
        })
        .collect::<Vec<_>>();
    let ceilings = if ceilings.is_empty() {
        // no points: still draw the profile's own roof
        let key = opts.ceiling.unwrap_or(ComputePrecision::Fp32);
        vec![CeilingSpec::from_profile(profile, key, opts.basis)?]
    } else {
        ceilings
    };
    let chart = ChartSpec {
        title: format!("{} on {}", arch.name, profile.name),
        ceilings,
        points: points.clone(),
        phi_annotations: true,
        phi_ceiling: 0,
        point_ceilings,
    };
    Ok(Analysis { points, ridges, phis, gaps: gap_analysis(profile), chart })
}

impl Analysis {
    pub fn points_csv(&self) -> Result<String> {
        export_csv(&self.points, &self.phis)
    }

    pub fn phi_csv(&self) -> Result<String> {
        export_phi_csv(&self.points, &self.phis)
    }

    pub fn gaps_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.gaps)?;
        s.push('\n');
        Ok(s)
    }

    pub fn svg(&self) -> Result<String> {
        render_chart(&self.chart)
    }

    /// Writes the four report files into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let files = [
            (POINTS_FILE, self.points_csv()?),
            (PHI_FILE, self.phi_csv()?),
            (GAPS_FILE, self.gaps_json()?),
            (CHART_FILE, self.svg()?),
            (CHART_SPEC_FILE, serde_json::to_string_pretty(&self.chart)? + "\n"),
        ];
        let mut written = Vec::new();
        for (name, body) in files {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::Render(format!("{}: {e}", path.display())))?;
            written.push(path);
        }
        Ok(written)
    }
}
