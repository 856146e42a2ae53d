//! Bundled hardware profiles, model architectures and llama-bench fixtures.

use crate::arch::ArchConfig;
use crate::error::{Error, Result};
use crate::roofline::HardwareProfile;

pub const HARDWARE_JSON: &str = include_str!("../data/hardware.json");
pub const ARCHITECTURES_JSON: &str = include_str!("../data/architectures.json");
pub const LLAMA_BENCH_FIXTURE: &str =
    include_str!("../data/fixtures/llama_bench_m1pro_qwen2.5-1.5b.json");
pub const RSS_TRACE_FIXTURE: &str =
    include_str!("../data/fixtures/rss_trace_m1pro_qwen2.5-1.5b_fp16.csv");

pub fn slug(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for c in name.chars() {
        if c.is_ascii_alphanumeric() || c == '.' {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    out.trim_matches('-').to_string()
}

fn lookup<'a, T>(items: &'a [T], key: &str, name: impl Fn(&T) -> &str, kind: &str) -> Result<&'a T> {
    let wanted = slug(key);
    if let Some(hit) = items.iter().find(|x| slug(name(x)) == wanted) {
        return Ok(hit);
    }
    let partial: Vec<&T> = items.iter().filter(|x| slug(name(x)).contains(&wanted)).collect();
    match partial.as_slice() {
        [one] => Ok(one),
        [] => Err(Error::config(format!(
            "no {kind} matching `{key}` in the catalog (known: {})",
            items.iter().map(|x| name(x)).collect::<Vec<_>>().join(", ")
        ))),
        many => Err(Error::config(format!(
            "`{key}` is ambiguous among {kind}s: {}",
            many.iter().map(|x| name(x)).collect::<Vec<_>>().join(", ")
        ))),
    }
}

pub fn hardware_profiles() -> Vec<HardwareProfile> {
    let list: Vec<HardwareProfile> =
        serde_json::from_str(HARDWARE_JSON).expect("bundled hardware catalog is valid JSON");
    for p in &list {
        p.validate().expect("bundled hardware catalog is valid");
    }
    list
}

/// Finds a device by name, slug, or unique slug fragment (e.g. `m1-pro`).
pub fn hardware(key: &str) -> Result<HardwareProfile> {
    let all = hardware_profiles();
    lookup(&all, key, |p| p.name.as_str(), "device").cloned()
}

pub fn architectures() -> Vec<ArchConfig> {
    serde_json::from_str(ARCHITECTURES_JSON).expect("bundled architecture catalog is valid")
}

pub fn architecture(key: &str) -> Result<ArchConfig> {
    let all = architectures();
    lookup(&all, key, |a| a.name.as_str(), "architecture").cloned()
}
