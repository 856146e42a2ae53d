use serde::{Deserialize, Serialize};

use crate::arch::{decode_step_cost, scale_layers, ArchConfig, CostOptions};
use crate::error::{Error, Result};
use crate::precision::{ComputePrecision, Precision};
use crate::roofline::{ridge, Basis, HardwareProfile, Provenance, RooflinePoint};
use crate::scenario::Scenario;

/// Representative prompt/generation lengths for each scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioShapes {
    pub short: u64,
    pub long: u64,
}

impl Default for ScenarioShapes {
    fn default() -> Self {
        ScenarioShapes { short: 128, long: 1024 }
    }
}

impl ScenarioShapes {
    pub fn tokens(&self, scenario: Scenario) -> (u64, u64) {
        let (s, l) = (self.short, self.long);
        match scenario {
            Scenario::Siso => (s, s),
            Scenario::Silo => (s, l),
            Scenario::Liso => (l, s),
            Scenario::Lilo => (l, l),
        }
    }

    /// Mid-generation context, matching the default join convention.
    pub fn decode_context(&self, scenario: Scenario) -> u64 {
        let (p, g) = self.tokens(scenario);
        (p + g / 2).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", content = "values", rename_all = "snake_case")]
pub enum SweepValues {
    Layers(Vec<u64>),
    Precision(Vec<Precision>),
    Scenario(Vec<Scenario>),
    ContextLength(Vec<u64>),
}

impl SweepValues {
    fn len(&self) -> usize {
        match self {
            SweepValues::Layers(v) | SweepValues::ContextLength(v) => v.len(),
            SweepValues::Precision(v) => v.len(),
            SweepValues::Scenario(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub values: SweepValues,
    pub arch: ArchConfig,
    pub profile: HardwareProfile,
    pub basis: Basis,
    /// Compute ceiling the predicted points are placed under.
    pub ceiling: ComputePrecision,
    /// Cost settings; the swept quantity overrides its own field.
    pub cost: CostOptions,
    /// Decode context used by the layer and precision axes.
    pub context: u64,
    pub shapes: ScenarioShapes,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.len() == 0 {
            return Err(Error::config("sweep needs at least one value"));
        }
        match &self.values {
            SweepValues::Layers(v) if v.contains(&0) => Err(Error::config("layer counts must be >= 1")),
            SweepValues::ContextLength(v) if v.contains(&0) => Err(Error::config("context lengths must be >= 1")),
            _ if self.context == 0 => Err(Error::config("sweep context must be >= 1")),
            _ => Ok(()),
        }
    }
}

fn tag(value: impl std::fmt::Display, e: Error) -> Error {
    Error::config(format!("sweep value {value}: {e}"))
}

/// One predicted point per value, placed on the ceiling at its operational intensity.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<RooflinePoint>> {
    spec.validate()?;
    let r = ridge(&spec.profile, spec.ceiling, spec.basis)?;
    let place = |label: String, arch: &ArchConfig, context: u64, opts: &CostOptions| -> Result<RooflinePoint> {
        let cost = decode_step_cost(arch, context, opts)?;
        let oi = cost.oi().ok_or_else(|| Error::DegenerateCost(format!("`{label}` moves no bytes")))?;
        Ok(RooflinePoint::new(label, oi, r.attainable(oi), Provenance::Predicted)?.classified(&r))
    };
    let name = &spec.arch.name;
    let mut out = Vec::with_capacity(spec.values.len());
    match &spec.values {
        SweepValues::Layers(layers) => {
            for &l in layers {
                let arch = scale_layers(&spec.arch, l).map_err(|e| tag(l, e))?;
                out.push(place(format!("{name} L={l}"), &arch, spec.context, &spec.cost).map_err(|e| tag(l, e))?);
            }
        }
        SweepValues::Precision(precisions) => {
            for &p in precisions {
                let opts = CostOptions { weight_precision: p, ..spec.cost };
                out.push(place(format!("{name} {p}"), &spec.arch, spec.context, &opts).map_err(|e| tag(p, e))?);
            }
        }
        SweepValues::Scenario(scenarios) => {
            for &s in scenarios {
                let ctx = spec.shapes.decode_context(s);
                let p = place(format!("{name} {s}"), &spec.arch, ctx, &spec.cost).map_err(|e| tag(s, e))?;
                out.push(p.with_scenario(s));
            }
        }
        SweepValues::ContextLength(contexts) => {
            for &n in contexts {
                out.push(place(format!("{name} N={n}"), &spec.arch, n, &spec.cost).map_err(|e| tag(n, e))?);
            }
        }
    }
    Ok(out)
}
