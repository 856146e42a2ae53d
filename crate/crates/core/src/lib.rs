//! Roofline analysis of on-device LLM decoding.
//!
//! `arch` counts FLOPs and bytes per decode step for the common attention
//! variants, `roofline` places workloads against hardware ceilings and scores
//! them with the relative inference potential Φ, `hwprobe` measures a host's
//! ceilings, `ingest` turns llama-bench output into measured points and
//! `report` renders sweeps, tables and SVG charts.

pub mod arch;
pub mod catalog;
pub mod config;
pub mod error;
pub mod hwprobe;
pub mod ingest;
pub mod precision;
pub mod report;
pub mod roofline;
pub mod scenario;

pub use arch::{ArchConfig, AttentionKind, CostBreakdown, CostMode, CostOptions, FfnKind, FlopsConvention};
pub use config::ToolConfig;
pub use error::{Error, Result};
pub use precision::{ComputePrecision, Precision};
pub use roofline::{
    classify, phi, ridge, Basis, HardwareProfile, PhiResult, PhiSpace, Provenance, Regime, RidgePoint, RooflinePoint,
};
pub use scenario::{classify_scenario, Scenario, ScenarioThresholds};
