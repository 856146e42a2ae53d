//! Roofline ceilings, regime classification and the Relative Inference
//! Potential (Φ) headroom metric.
//!
//! Units are decimal throughout: GFLOPS (1e9 FLOP/s) and GB/s (1e9 B/s).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arch::CostBreakdown;
use crate::error::{Error, Result};
use crate::precision::{ComputePrecision, Precision};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArchitectureClass {
    DiscreteGPU,
    UnifiedSoC,
    EdgeAIModule,
    GeneralCPU,
}

/// Which value of a ceiling is used: the vendor figure or a benchmark result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Theoretical,
    Measured,
}

impl Basis {
    pub fn as_str(&self) -> &'static str {
        match self {
            Basis::Theoretical => "theoretical",
            Basis::Measured => "measured",
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Basis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "theoretical" | "theo" => Ok(Basis::Theoretical),
            "measured" | "meas" => Ok(Basis::Measured),
            _ => Err(Error::config(format!("unknown basis `{s}` (theoretical, measured)"))),
        }
    }
}

/// A theoretical/measured pair; at least one side is present.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CeilingPair {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theoretical: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measured: Option<f64>,
}

impl CeilingPair {
    pub fn new(theoretical: Option<f64>, measured: Option<f64>) -> Self {
        CeilingPair { theoretical, measured }
    }

    pub fn get(&self, basis: Basis) -> Option<f64> {
        match basis {
            Basis::Theoretical => self.theoretical,
            Basis::Measured => self.measured,
        }
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.theoretical.is_none() && self.measured.is_none() {
            return Err(Error::Schema {
                path: what.to_string(),
                message: "needs at least one of `theoretical` or `measured`".into(),
            });
        }
        for (key, v) in [("theoretical", self.theoretical), ("measured", self.measured)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Schema {
                        path: format!("{what}.{key}"),
                        message: format!("expected a positive number, got {v}"),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Compute and bandwidth capabilities of one device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardwareProfile {
    pub name: String,
    pub architecture_class: ArchitectureClass,
    pub bandwidth_gbps: CeilingPair,
    pub peak_gflops: BTreeMap<ComputePrecision, CeilingPair>,
    pub source: String,
    pub timestamp: String,
}

impl HardwareProfile {
    pub fn validate(&self) -> Result<()> {
        self.bandwidth_gbps.validate("bandwidth_gbps")?;
        for (p, pair) in &self.peak_gflops {
            pair.validate(&format!("peak_gflops.{p}"))?;
        }
        Ok(())
    }

    /// Parses the shared profile JSON schema and validates it.
    pub fn from_json(text: &str) -> Result<Self> {
        let profile: HardwareProfile = crate::error::from_json_str(text)?;
        profile.validate()?;
        Ok(profile)
    }

    /// Canonical JSON: fixed key order, shortest round-trip float formatting.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn bandwidth(&self, basis: Basis) -> Result<f64> {
        self.bandwidth_gbps.get(basis).ok_or_else(|| Error::NotProfiled {
            profile: self.name.clone(),
            basis: basis.to_string(),
            what: "bandwidth".into(),
        })
    }

    pub fn peak(&self, precision: ComputePrecision, basis: Basis) -> Result<f64> {
        self.peak_gflops
            .get(&precision)
            .and_then(|pair| pair.get(basis))
            .ok_or_else(|| Error::NotProfiled {
                profile: self.name.clone(),
                basis: basis.to_string(),
                what: format!("{precision} peak"),
            })
    }
}

/// Where the bandwidth roof meets the compute roof.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgePoint {
    /// FLOPs/Byte.
    pub oi_r: f64,
    /// GFLOPS.
    pub pi: f64,
    /// GB/s.
    pub bandwidth: f64,
    pub basis: Basis,
    pub precision: ComputePrecision,
}

impl RidgePoint {
    pub fn attainable(&self, oi: f64) -> f64 {
        self.pi.min(oi * self.bandwidth)
    }

    fn same_ceiling(&self, other: &RidgePoint) -> bool {
        self.basis == other.basis
            && self.precision == other.precision
            && self.oi_r.to_bits() == other.oi_r.to_bits()
            && self.pi.to_bits() == other.pi.to_bits()
    }
}

pub fn ridge(profile: &HardwareProfile, precision: ComputePrecision, basis: Basis) -> Result<RidgePoint> {
    let pi = profile.peak(precision, basis)?;
    let bandwidth = profile.bandwidth(basis)?;
    Ok(RidgePoint {
        oi_r: pi / bandwidth,
        pi,
        bandwidth,
        basis,
        precision,
    })
}

/// Attainable GFLOPS at operational intensity `oi`: `min(peak, oi * bandwidth)`.
pub fn attainable(
    profile: &HardwareProfile,
    oi: f64,
    precision: ComputePrecision,
    basis: Basis,
) -> Result<f64> {
    if !(oi > 0.0) {
        return Err(Error::domain(format!("operational intensity must be positive, got {oi}")));
    }
    Ok(ridge(profile, precision, basis)?.attainable(oi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    MemoryBound,
    ComputeBound,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::MemoryBound => "MemoryBound",
            Regime::ComputeBound => "ComputeBound",
        })
    }
}

/// The ridge itself counts as compute-bound.
pub fn classify(oi: f64, ridge: &RidgePoint) -> Regime {
    if oi < ridge.oi_r {
        Regime::MemoryBound
    } else {
        Regime::ComputeBound
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Measured,
    Predicted,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Measured => "measured",
            Provenance::Predicted => "predicted",
        })
    }
}

/// A workload placed on the roofline plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RooflinePoint {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    /// FLOPs/Byte.
    pub oi: f64,
    /// GFLOPS.
    pub perf_gflops: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<Regime>,
    pub provenance: Provenance,
}

impl RooflinePoint {
    pub fn new(label: impl Into<String>, oi: f64, perf_gflops: f64, provenance: Provenance) -> Result<Self> {
        let label = label.into();
        if !(oi > 0.0 && oi.is_finite() && perf_gflops > 0.0 && perf_gflops.is_finite()) {
            return Err(Error::domain(format!(
                "point `{label}` needs positive finite coordinates (oi={oi}, perf={perf_gflops})"
            )));
        }
        Ok(RooflinePoint {
            label,
            scenario: None,
            oi,
            perf_gflops,
            regime: None,
            provenance,
        })
    }

    pub fn with_scenario(mut self, scenario: Scenario) -> Self {
        self.scenario = Some(scenario);
        self
    }

    /// Records the regime relative to `ridge`.
    pub fn classified(mut self, ridge: &RidgePoint) -> Self {
        self.regime = Some(classify(self.oi, ridge));
        self
    }
}

/// Places a cost on the plane given its measured (or implied) per-unit latency.
pub fn to_point(
    cost: &CostBreakdown,
    latency_s: f64,
    label: impl Into<String>,
    provenance: Provenance,
) -> Result<RooflinePoint> {
    let label = label.into();
    if !(latency_s > 0.0 && latency_s.is_finite()) {
        return Err(Error::domain(format!("latency must be positive, got {latency_s}")));
    }
    let (w, q) = (cost.w_total(), cost.q_total());
    if !(q > 0.0) {
        return Err(Error::DegenerateCost(format!("`{label}` moves no bytes")));
    }
    if !(w > 0.0) {
        return Err(Error::DegenerateCost(format!("`{label}` performs no FLOPs")));
    }
    RooflinePoint::new(label, w / q, w / latency_s / 1e9, provenance)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhiSpace {
    /// FLOPs/Byte and GFLOPS as-is.
    #[default]
    Raw,
    /// Both coordinates in log10, as on the log-log chart.
    Log10,
}

impl std::str::FromStr for PhiSpace {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "raw" => Ok(PhiSpace::Raw),
            "log10" => Ok(PhiSpace::Log10),
            _ => Err(Error::config(format!("unknown phi space `{s}` (raw, log10)"))),
        }
    }
}

impl fmt::Display for PhiSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhiSpace::Raw => "raw",
            PhiSpace::Log10 => "log10",
        })
    }
}

/// Relative Inference Potential of one point against one ridge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiResult {
    pub value: f64,
    pub regime: Regime,
    pub space: PhiSpace,
    pub ridge: RidgePoint,
    /// The point sits above the compute roof; `value` was clamped to 0.
    pub above_ceiling: bool,
}

impl PhiResult {
    /// Potentials are only comparable within one regime against one ridge.
    pub fn comparable_with(&self, other: &PhiResult) -> bool {
        self.regime == other.regime && self.space == other.space && self.ridge.same_ceiling(&other.ridge)
    }
}

/// Memory-bound: distance to the ridge. Compute-bound: vertical gap to the peak.
pub fn phi(point: &RooflinePoint, ridge: &RidgePoint, space: PhiSpace) -> PhiResult {
    let regime = classify(point.oi, ridge);
    let above_ceiling = point.perf_gflops > ridge.pi;
    if above_ceiling {
        log::debug!(
            "point `{}` ({} GFLOPS) exceeds the {} {} peak ({} GFLOPS); potential clamped to 0",
            point.label,
            point.perf_gflops,
            ridge.basis,
            ridge.precision,
            ridge.pi
        );
    }
    let (oi_r, pi, oi_p, perf_p) = match space {
        PhiSpace::Raw => (ridge.oi_r, ridge.pi, point.oi, point.perf_gflops),
        PhiSpace::Log10 => (
            ridge.oi_r.log10(),
            ridge.pi.log10(),
            point.oi.log10(),
            point.perf_gflops.log10(),
        ),
    };
    let value = if above_ceiling {
        0.0
    } else {
        match regime {
            Regime::MemoryBound => (oi_r - oi_p).hypot(pi - perf_p),
            Regime::ComputeBound => pi - perf_p,
        }
    };
    PhiResult {
        value,
        regime,
        space,
        ridge: *ridge,
        above_ceiling,
    }
}

/// Vertices (oi, GFLOPS) of the region between a point and the roof it could still climb
/// to: the point, the roof directly above it, the ridge, and the point's projection on π
/// once it sits right of the ridge. Empty when the point is already at or above π.
pub fn potential_region(point: &RooflinePoint, ridge: &RidgePoint) -> Vec<(f64, f64)> {
    if point.perf_gflops >= ridge.pi {
        return Vec::new();
    }
    let p = (point.oi, point.perf_gflops);
    match classify(point.oi, ridge) {
        Regime::MemoryBound => {
            let roof = ridge.attainable(point.oi).max(point.perf_gflops);
            vec![p, (point.oi, roof), (ridge.oi_r, ridge.pi)]
        }
        Regime::ComputeBound => vec![p, (ridge.oi_r, ridge.pi), (point.oi, ridge.pi)],
    }
}

/// Bound on decode speed from the parameter-count timing model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedTiming {
    /// Seconds per token spent on arithmetic at peak.
    pub t_comp: f64,
    /// Seconds per token spent streaming weights at full bandwidth.
    pub t_mem: f64,
    pub bound_tps: f64,
    /// Implied operational intensity, 2 / bytes-per-weight.
    pub oi: f64,
    pub regime: Regime,
}

pub fn predict_decode(
    n_params: f64,
    precision: Precision,
    profile: &HardwareProfile,
    compute: ComputePrecision,
    basis: Basis,
) -> Result<PredictedTiming> {
    if !(n_params > 0.0 && n_params.is_finite()) {
        return Err(Error::domain(format!("parameter count must be positive, got {n_params}")));
    }
    let r = ridge(profile, compute, basis)?;
    let bytes = precision.bytes_per_weight();
    let t_comp = 2.0 * n_params / (r.pi * 1e9);
    let t_mem = n_params * bytes / (r.bandwidth * 1e9);
    let oi = 2.0 / bytes;
    Ok(PredictedTiming {
        t_comp,
        t_mem,
        bound_tps: 1.0 / t_comp.max(t_mem),
        oi,
        regime: classify(oi, &r),
    })
}
