//! Numeric storage formats and their byte costs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Storage format of weights or KV-cache entries.
///
/// Quantized byte costs follow the GGUF block layouts: `Q8_0` stores 32
/// weights in 34 bytes, `Q4_K_M` averages 4.5 bits per weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PrecisionRepr", into = "PrecisionRepr")]
pub enum Precision {
    Fp32,
    Fp16,
    Q8_0,
    Q4KM,
    Custom { bytes_per_weight: f64 },
}

impl Precision {
    pub const MAX_CUSTOM_BYTES: f64 = 8.0;

    pub fn custom(bytes_per_weight: f64) -> Result<Self> {
        if !(bytes_per_weight > 0.0 && bytes_per_weight <= Self::MAX_CUSTOM_BYTES) {
            return Err(Error::config(format!(
                "custom precision needs bytes_per_weight in (0, 8], got {bytes_per_weight}"
            )));
        }
        Ok(Precision::Custom { bytes_per_weight })
    }

    pub fn bytes_per_weight(&self) -> f64 {
        match self {
            Precision::Fp32 => 4.0,
            Precision::Fp16 => 2.0,
            Precision::Q8_0 => 34.0 / 32.0,
            Precision::Q4KM => 0.5625,
            Precision::Custom { bytes_per_weight } => *bytes_per_weight,
        }
    }

    /// The compute precision whose peak bounds kernels over this format.
    ///
    /// Quantized formats are dequantized into half-precision arithmetic.
    pub fn compute_key(&self) -> ComputePrecision {
        match self {
            Precision::Fp32 => ComputePrecision::Fp32,
            _ => ComputePrecision::Fp16,
        }
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Fp32 => f.write_str("fp32"),
            Precision::Fp16 => f.write_str("fp16"),
            Precision::Q8_0 => f.write_str("q8_0"),
            Precision::Q4KM => f.write_str("q4_k_m"),
            Precision::Custom { bytes_per_weight } => write!(f, "custom:{bytes_per_weight}"),
        }
    }
}

impl FromStr for Precision {
    type Err = Error;

    /// Accepts `fp32`, `fp16`/`f16`, `q8_0`, `q4_k_m`, or `custom:<bytes>`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "fp32" | "f32" => Ok(Precision::Fp32),
            "fp16" | "f16" => Ok(Precision::Fp16),
            "q8_0" => Ok(Precision::Q8_0),
            "q4_k_m" => Ok(Precision::Q4KM),
            other => match other.strip_prefix("custom:") {
                Some(v) => {
                    let bytes: f64 = v
                        .parse()
                        .map_err(|_| Error::config(format!("bad custom precision `{s}`")))?;
                    Precision::custom(bytes)
                }
                None => Err(Error::config(format!(
                    "unknown precision `{s}` (known: fp32, fp16, q8_0, q4_k_m, custom:<bytes>)"
                ))),
            },
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct PrecisionRepr(String);

impl TryFrom<PrecisionRepr> for Precision {
    type Error = Error;
    fn try_from(r: PrecisionRepr) -> Result<Self> {
        r.0.parse()
    }
}

impl From<Precision> for PrecisionRepr {
    fn from(p: Precision) -> Self {
        PrecisionRepr(p.to_string())
    }
}

/// Arithmetic precision of a hardware compute ceiling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComputePrecision {
    Fp64,
    Fp32,
    Fp16,
}

impl ComputePrecision {
    pub fn as_str(&self) -> &'static str {
        match self {
            ComputePrecision::Fp64 => "fp64",
            ComputePrecision::Fp32 => "fp32",
            ComputePrecision::Fp16 => "fp16",
        }
    }
}

impl fmt::Display for ComputePrecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ComputePrecision {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fp64" | "f64" => Ok(ComputePrecision::Fp64),
            "fp32" | "f32" => Ok(ComputePrecision::Fp32),
            "fp16" | "f16" => Ok(ComputePrecision::Fp16),
            _ => Err(Error::config(format!(
                "unknown compute precision `{s}` (known: fp64, fp32, fp16)"
            ))),
        }
    }
}
