//! CSV tables for external plotting.

use crate::error::{Error, Result};
use crate::roofline::{PhiResult, RooflinePoint};

pub const POINTS_HEADER: [&str; 8] = [
    "label",
    "scenario",
    "oi_flops_per_byte",
    "perf_gflops",
    "regime",
    "phi_raw",
    "phi_log10",
    "provenance",
];

pub const PHI_HEADER: [&str; 11] = [
    "label",
    "scenario",
    "regime",
    "phi",
    "space",
    "above_ceiling",
    "ridge_oi",
    "ridge_gflops",
    "ridge_bandwidth_gbps",
    "basis",
    "precision",
];

/// Both potentials of one point against the same ridge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiPair {
    pub raw: PhiResult,
    pub log10: PhiResult,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Csv(e)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Render(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Invariant(e.to_string()))
}

fn sorted_indices(points: &[RooflinePoint]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| points[a].label.cmp(&points[b].label));
    idx
}

fn check_aligned(points: usize, phis: usize) -> Result<()> {
    if points != phis {
        return Err(Error::Render(format!(
            "{points} points but {phis} potentials; lists must be aligned"
        )));
    }
    Ok(())
}

/// One row per point, ordered by label (ties keep input order).
pub fn export_csv(points: &[RooflinePoint], phis: &[PhiPair]) -> Result<String> {
    check_aligned(points.len(), phis.len())?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(POINTS_HEADER).map_err(csv_err)?;
    for i in sorted_indices(points) {
        let (p, phi) = (&points[i], &phis[i]);
        w.write_record([
            p.label.clone(),
            p.scenario.map(|s| s.to_string()).unwrap_or_default(),
            p.oi.to_string(),
            p.perf_gflops.to_string(),
            phi.raw.regime.to_string(),
            phi.raw.value.to_string(),
            phi.log10.value.to_string(),
            p.provenance.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

/// Long-form potentials with the ridge each was measured against.
pub fn export_phi_csv(points: &[RooflinePoint], phis: &[PhiPair]) -> Result<String> {
    check_aligned(points.len(), phis.len())?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(PHI_HEADER).map_err(csv_err)?;
    for i in sorted_indices(points) {
        let p = &points[i];
        for r in [phis[i].raw, phis[i].log10] {
            w.write_record([
                p.label.clone(),
                p.scenario.map(|s| s.to_string()).unwrap_or_default(),
                r.regime.to_string(),
                r.value.to_string(),
                r.space.to_string(),
                r.above_ceiling.to_string(),
                r.ridge.oi_r.to_string(),
                r.ridge.pi.to_string(),
                r.ridge.bandwidth.to_string(),
                r.ridge.basis.to_string(),
                r.ridge.precision.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    finish(w)
}
