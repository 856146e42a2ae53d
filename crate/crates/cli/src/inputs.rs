//! Resolving `--arch`, `--profile` and `--runs` arguments.

use std::path::Path;

use anyhow::{Context, Result};
use rooflinebench::ingest::{parse_llama_bench, parse_memory_trace, records_from_json, RunRecord};
use rooflinebench::{catalog, ArchConfig, HardwareProfile};

const CATALOG_PREFIX: &str = "catalog:";

fn read(path: &str) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read `{path}`"))
}

/// `catalog:<name>` or a JSON file in the shared profile schema.
pub fn profile(arg: &str) -> Result<HardwareProfile> {
    if let Some(name) = arg.strip_prefix(CATALOG_PREFIX) {
        return Ok(catalog::hardware(name)?);
    }
    HardwareProfile::from_json(&read(arg)?).with_context(|| format!("invalid hardware profile `{arg}`"))
}

pub fn arch(arg: &str) -> Result<ArchConfig> {
    if let Some(name) = arg.strip_prefix(CATALOG_PREFIX) {
        return Ok(catalog::architecture(name)?);
    }
    ArchConfig::from_json(&read(arg)?).with_context(|| format!("invalid architecture `{arg}`"))
}

fn looks_normalized(text: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(text)
        .ok()
        .and_then(|v| v.as_array().and_then(|a| a.first().cloned()))
        .is_some_and(|first| first.get("model_name").is_some())
}

/// Runs from llama-bench `-o json` output or from normalized record JSON.
/// `catalog:fixture` selects the bundled llama-bench fixture.
pub fn runs(arg: &str) -> Result<Vec<RunRecord>> {
    let text = if arg == "catalog:fixture" { catalog::LLAMA_BENCH_FIXTURE.to_string() } else { read(arg)? };
    if looks_normalized(&text) {
        return records_from_json(&text).with_context(|| format!("invalid run records `{arg}`"));
    }
    let report = parse_llama_bench(&text).with_context(|| format!("invalid llama-bench output `{arg}`"))?;
    for e in &report.errors {
        log::warn!("{arg}: row {}: {}", e.row, e.message);
    }
    if report.records.is_empty() {
        anyhow::bail!("`{arg}` contains no usable runs");
    }
    Ok(report.records)
}

/// Attaches the trace summary to every record.
pub fn attach_memory(records: &mut [RunRecord], trace: &Path) -> Result<()> {
    let text = std::fs::read_to_string(trace).with_context(|| format!("cannot read `{}`", trace.display()))?;
    let parsed = parse_memory_trace(&text).with_context(|| format!("invalid memory trace `{}`", trace.display()))?;
    for w in &parsed.warnings {
        log::warn!("{}: {w}", trace.display());
    }
    for e in &parsed.row_errors {
        log::warn!("{}: line {}: {}", trace.display(), e.0, e.1);
    }
    for r in records.iter_mut() {
        r.memory = Some(parsed.summary);
    }
    Ok(())
}
