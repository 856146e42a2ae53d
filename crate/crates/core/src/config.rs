//! Tool-wide knobs, loaded from JSON with environment and flag overrides.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arch::{CostMode, FlopsConvention};
use crate::error::{Error, Result};
use crate::ingest::{DecodeContext, JoinOptions};
use crate::precision::Precision;
use crate::roofline::PhiSpace;
use crate::scenario::ScenarioThresholds;

pub const ENV_PREFIX: &str = "ROOFLINEBENCH_";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToolConfig {
    pub convention: FlopsConvention,
    pub phi_space: PhiSpace,
    /// Largest token count still considered short.
    pub scenario_boundary: u64,
    pub cost_mode: CostMode,
    pub kv_write_traffic: bool,
    pub include_lm_head: bool,
    pub decode_context: DecodeContext,
}

impl Default for ToolConfig {
    fn default() -> Self {
        ToolConfig {
            convention: FlopsConvention::Fma,
            phi_space: PhiSpace::Raw,
            scenario_boundary: 512,
            cost_mode: CostMode::Detailed,
            kv_write_traffic: true,
            include_lm_head: true,
            decode_context: DecodeContext::Mid,
        }
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "on" | "yes" => Ok(true),
        "0" | "false" | "off" | "no" => Ok(false),
        _ => Err(Error::config(format!("{key}: expected a boolean, got `{v}`"))),
    }
}

impl ToolConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        crate::error::from_json_str(text)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Applies one `key = value` override, keyed by field name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |e: Error| Error::config(format!("{key}: {e}"));
        match key {
            "convention" => self.convention = value.parse().map_err(bad)?,
            "phi_space" => self.phi_space = value.parse().map_err(bad)?,
            "scenario_boundary" => {
                self.scenario_boundary = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::config(format!("{key}: expected a token count, got `{value}`")))?
            }
            "cost_mode" => self.cost_mode = value.parse().map_err(bad)?,
            "kv_write_traffic" => self.kv_write_traffic = parse_bool(key, value)?,
            "include_lm_head" => self.include_lm_head = parse_bool(key, value)?,
            "decode_context" => self.decode_context = value.parse().map_err(bad)?,
            _ => return Err(Error::config(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Overrides from `ROOFLINEBENCH_<FIELD>` variables in `vars`.
    pub fn apply_env<I>(&mut self, vars: I) -> Result<()>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        // sorted so a bad variable is always reported the same way
        let picked: BTreeMap<String, String> = vars
            .into_iter()
            .filter_map(|(k, v)| k.strip_prefix(ENV_PREFIX).map(|f| (f.to_ascii_lowercase(), v)))
            .collect();
        for (k, v) in picked {
            self.set(&k, &v).map_err(|e| Error::config(format!("{ENV_PREFIX}{}: {e}", k.to_ascii_uppercase())))?;
        }
        Ok(())
    }

    pub fn thresholds(&self) -> ScenarioThresholds {
        ScenarioThresholds::single_boundary(self.scenario_boundary)
    }

    pub fn join_options(&self) -> JoinOptions {
        JoinOptions {
            convention: self.convention,
            mode: self.cost_mode,
            include_lm_head: self.include_lm_head,
            kv_precision: Precision::Fp16,
            kv_read: true,
            kv_write: self.kv_write_traffic,
            context: self.decode_context,
            thresholds: self.thresholds(),
            ..JoinOptions::default()
        }
    }
}
