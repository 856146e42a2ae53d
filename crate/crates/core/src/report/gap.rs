use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::precision::ComputePrecision;
use crate::roofline::{Basis, HardwareProfile};

/// Theoretical-minus-measured differences for one compute precision.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComputeGap {
    /// Signed; negative when the measured peak beats the vendor figure.
    pub compute_gap_gflops: Option<f64>,
    pub ridge_theoretical: Option<f64>,
    pub ridge_measured: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub profile: String,
    pub bandwidth_gap_gbps: Option<f64>,
    pub compute: BTreeMap<ComputePrecision, ComputeGap>,
}

/// Absent pairs stay absent; nothing is reported as a zero gap by default.
pub fn gap_analysis(profile: &HardwareProfile) -> GapReport {
    let bw = &profile.bandwidth_gbps;
    let diff = |t: Option<f64>, m: Option<f64>| t.zip(m).map(|(t, m)| t - m);
    let ridge_for = |peak: Option<f64>, basis: Basis| peak.zip(bw.get(basis)).map(|(p, b)| p / b);
    let compute = profile
        .peak_gflops
        .iter()
        .map(|(p, pair)| {
            let gap = ComputeGap {
                compute_gap_gflops: diff(pair.theoretical, pair.measured),
                ridge_theoretical: ridge_for(pair.theoretical, Basis::Theoretical),
                ridge_measured: ridge_for(pair.measured, Basis::Measured),
            };
            (*p, gap)
        })
        .collect();
    GapReport {
        profile: profile.name.clone(),
        bandwidth_gap_gbps: diff(bw.theoretical, bw.measured),
        compute,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::roofline::CeilingPair;

    #[test]
    fn m1_pro_bandwidth_gap() {
        let g = gap_analysis(&catalog::hardware("m1-pro").unwrap());
        assert!((g.bandwidth_gap_gbps.unwrap() - 84.77).abs() < 1e-9);
        let fp16 = g.compute[&ComputePrecision::Fp16];
        assert_eq!(fp16.compute_gap_gflops, None);
        assert_eq!(fp16.ridge_theoretical, None);
        assert!((fp16.ridge_measured.unwrap() - 4610.0 / 120.03).abs() < 1e-12);
    }

    #[test]
    fn rtx_3090_compute_gap() {
        let g = gap_analysis(&catalog::hardware("rtx-3090").unwrap());
        assert_eq!(g.compute[&ComputePrecision::Fp32].compute_gap_gflops, Some(11300.0));
        assert!(g.compute[&ComputePrecision::Fp16].compute_gap_gflops.unwrap() < 0.0);
    }

    #[test]
    fn measured_only_profile_has_no_gaps() {
        let mut p = catalog::hardware("m1-pro").unwrap();
        p.bandwidth_gbps = CeilingPair::new(None, Some(50.0));
        for pair in p.peak_gflops.values_mut() {
            pair.theoretical = None;
        }
        let g = gap_analysis(&p);
        assert_eq!(g.bandwidth_gap_gbps, None);
        assert!(g.compute.values().all(|c| c.compute_gap_gflops.is_none() && c.ridge_theoretical.is_none()));
    }
}
