use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Input/output length class of a run: short or long prompt crossed with
/// short or long generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "SISO")]
    Siso,
    #[serde(rename = "SILO")]
    Silo,
    #[serde(rename = "LISO")]
    Liso,
    #[serde(rename = "LILO")]
    Lilo,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::Siso, Scenario::Silo, Scenario::Liso, Scenario::Lilo];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::Siso => "SISO",
            Scenario::Silo => "SILO",
            Scenario::Liso => "LISO",
            Scenario::Lilo => "LILO",
        }
    }

    fn from_axes(long_in: bool, long_out: bool) -> Self {
        match (long_in, long_out) {
            (false, false) => Scenario::Siso,
            (false, true) => Scenario::Silo,
            (true, false) => Scenario::Liso,
            (true, true) => Scenario::Lilo,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::config(format!("unknown scenario `{s}` (SISO, SILO, LISO, LILO)")))
    }
}

/// Token-count boundaries between short and long.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioThresholds {
    pub short_max: u64,
    pub long_min: u64,
}

impl Default for ScenarioThresholds {
    fn default() -> Self {
        ScenarioThresholds::single_boundary(512)
    }
}

impl ScenarioThresholds {
    pub fn single_boundary(short_max: u64) -> Self {
        ScenarioThresholds {
            short_max,
            long_min: short_max + 1,
        }
    }

    pub fn new(short_max: u64, long_min: u64) -> Result<Self> {
        if short_max >= long_min {
            return Err(Error::config(format!(
                "scenario thresholds need short_max < long_min ({short_max} >= {long_min})"
            )));
        }
        Ok(ScenarioThresholds { short_max, long_min })
    }
}

/// Total over all token counts: anything above `short_max` is long.
pub fn classify_scenario(n_prompt: u64, n_gen: u64, thresholds: ScenarioThresholds) -> Scenario {
    Scenario::from_axes(n_prompt > thresholds.short_max, n_gen > thresholds.short_max)
}
