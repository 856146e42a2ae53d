//! llama-bench results and memory traces, and their placement on the roofline.

mod join;
mod llama_bench;
mod memtrace;

pub use join::{join, DecodeContext, JoinOptions, JoinedPoints};
pub use llama_bench::{parse_llama_bench, precision_from_quant_label, ParseReport, RowError};
pub use memtrace::{parse_memory_trace, MemoryTrace};

pub use crate::scenario::{classify_scenario, Scenario, ScenarioThresholds};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One benchmarked configuration: a model at one quantization with one
/// prompt/generation length pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub model_name: String,
    pub model_n_params: u64,
    pub quant_label: String,
    pub n_prompt: u64,
    pub n_gen: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefill_tps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decode_tps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stddev_ts: Option<f64>,
    pub backend: String,
    pub device: String,
    pub timestamp: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub build_commit: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory: Option<MemorySummary>,
}

impl RunRecord {
    pub fn validate(&self) -> Result<()> {
        if self.prefill_tps.is_none() && self.decode_tps.is_none() {
            return Err(Error::config(format!("{}: record has neither prefill nor decode TPS", self.model_name)));
        }
        if self.n_prompt == 0 && self.n_gen == 0 {
            return Err(Error::config(format!("{}: record has no prompt or generated tokens", self.model_name)));
        }
        Ok(())
    }

    pub fn scenario(&self, thresholds: ScenarioThresholds) -> Scenario {
        classify_scenario(self.n_prompt, self.n_gen, thresholds)
    }
}

/// Normalized JSON export of parsed records.
pub fn records_to_json(records: &[RunRecord]) -> Result<String> {
    Ok(serde_json::to_string_pretty(records)?)
}

pub fn records_from_json(text: &str) -> Result<Vec<RunRecord>> {
    let records: Vec<RunRecord> = crate::error::from_json_str(text)?;
    for r in &records {
        r.validate()?;
    }
    Ok(records)
}

/// Resident-memory statistics of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemorySummary {
    pub peak_bytes: u64,
    pub steady_bytes: u64,
    pub samples: u64,
}
