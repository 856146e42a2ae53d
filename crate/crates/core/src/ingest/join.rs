use serde::{Deserialize, Serialize};

use super::{precision_from_quant_label, RunRecord};
use crate::arch::{decode_step_cost, mean_decode_cost, prefill_cost, ArchConfig, CostBreakdown, CostMode, CostOptions, FlopsConvention};
use crate::error::{Error, Result};
use crate::precision::Precision;
use crate::roofline::{to_point, Provenance, RooflinePoint};
use crate::scenario::{Scenario, ScenarioThresholds};

/// Which context length represents a decode run whose context grows from
/// `n_prompt` to `n_prompt + n_gen`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecodeContext {
    Start,
    #[default]
    Mid,
    End,
    /// Average of the exact per-step costs over every generated token.
    ExactIntegral,
}

impl std::str::FromStr for DecodeContext {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "start" => Ok(DecodeContext::Start),
            "mid" => Ok(DecodeContext::Mid),
            "end" => Ok(DecodeContext::End),
            "exact-integral" | "exact" => Ok(DecodeContext::ExactIntegral),
            _ => Err(Error::config(format!("unknown decode context `{s}` (start, mid, end, exact-integral)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JoinOptions {
    pub convention: FlopsConvention,
    pub mode: CostMode,
    pub include_lm_head: bool,
    pub kv_precision: Precision,
    pub kv_read: bool,
    pub kv_write: bool,
    pub context: DecodeContext,
    pub thresholds: ScenarioThresholds,
    /// Allowed relative difference between the architecture's and the run's parameter counts.
    pub param_tolerance: f64,
}

impl Default for JoinOptions {
    fn default() -> Self {
        JoinOptions {
            convention: FlopsConvention::Fma,
            mode: CostMode::Detailed,
            include_lm_head: true,
            kv_precision: Precision::Fp16,
            kv_read: true,
            kv_write: true,
            context: DecodeContext::Mid,
            thresholds: ScenarioThresholds::default(),
            param_tolerance: 0.10,
        }
    }
}

impl JoinOptions {
    pub fn cost_options(&self, weight_precision: Precision) -> CostOptions {
        CostOptions {
            weight_precision,
            kv_precision: self.kv_precision,
            convention: self.convention,
            mode: self.mode,
            include_lm_head: self.include_lm_head,
            kv_read: self.kv_read,
            kv_write: self.kv_write,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JoinedPoints {
    pub scenario: Scenario,
    pub prefill_point: Option<RooflinePoint>,
    pub decode_point: Option<RooflinePoint>,
    pub prefill_cost: Option<CostBreakdown>,
    pub decode_cost: Option<CostBreakdown>,
}

/// Places a measured run on the roofline using the analytical cost of `arch`.
pub fn join(record: &RunRecord, arch: &ArchConfig, opts: &JoinOptions) -> Result<JoinedPoints> {
    let precision = precision_from_quant_label(&record.quant_label)?;
    let (ours, theirs) = (arch.n_params as f64, record.model_n_params as f64);
    if theirs <= 0.0 || ((ours - theirs) / theirs).abs() > opts.param_tolerance {
        return Err(Error::Join(format!(
            "parameter mismatch: architecture `{}` has {} parameters, run `{}` reports {}",
            arch.name, arch.n_params, record.model_name, record.model_n_params
        )));
    }
    let cost_opts = opts.cost_options(precision);
    let scenario = record.scenario(opts.thresholds);
    let base = format!("{} {} {}", record.model_name, record.quant_label, scenario);

    let (mut decode_point, mut decode_cost) = (None, None);
    if let Some(tps) = record.decode_tps {
        if record.n_gen == 0 {
            return Err(Error::Join(format!("`{base}` has decode TPS but no generated tokens")));
        }
        let cost = match opts.context {
            DecodeContext::Start => decode_step_cost(arch, record.n_prompt.max(1), &cost_opts)?,
            DecodeContext::Mid => decode_step_cost(arch, (record.n_prompt + record.n_gen / 2).max(1), &cost_opts)?,
            DecodeContext::End => decode_step_cost(arch, record.n_prompt + record.n_gen, &cost_opts)?,
            DecodeContext::ExactIntegral => mean_decode_cost(arch, record.n_prompt, record.n_gen, &cost_opts)?,
        };
        let point = to_point(&cost, 1.0 / tps, format!("{base} decode"), Provenance::Measured)?;
        decode_point = Some(point.with_scenario(scenario));
        decode_cost = Some(cost);
    }

    let (mut prefill_point, mut prefill_cost_out) = (None, None);
    if let (Some(tps), true) = (record.prefill_tps, record.n_prompt > 0) {
        let cost = prefill_cost(arch, record.n_prompt, &cost_opts)?;
        let latency = record.n_prompt as f64 / tps;
        let point = to_point(&cost, latency, format!("{base} prefill"), Provenance::Measured)?;
        prefill_point = Some(point.with_scenario(scenario));
        prefill_cost_out = Some(cost);
    }

    Ok(JoinedPoints {
        scenario,
        prefill_point,
        decode_point,
        prefill_cost: prefill_cost_out,
        decode_cost,
    })
}
