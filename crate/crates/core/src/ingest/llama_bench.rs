use std::collections::HashMap;

use serde_json::Value;

use super::RunRecord;
use crate::error::{Error, Result};
use crate::precision::Precision;

/// Parsed records plus per-row problems; bad rows never abort the document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParseReport {
    pub records: Vec<RunRecord>,
    pub errors: Vec<RowError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    pub row: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Prefill,
    Decode,
}

struct Row {
    model_name: String,
    quant_label: String,
    n_params: u64,
    n_prompt: u64,
    n_gen: u64,
    phase: Phase,
    avg_ts: f64,
    stddev_ts: Option<f64>,
    backend: String,
    device: String,
    timestamp: String,
    build_commit: Option<String>,
}

fn str_field(obj: &serde_json::Map<String, Value>, key: &str) -> Option<String> {
    obj.get(key).and_then(Value::as_str).map(str::to_owned)
}

fn uint_field(obj: &serde_json::Map<String, Value>, key: &str) -> std::result::Result<Option<u64>, String> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_u64()
            .map(Some)
            .ok_or_else(|| format!("`{key}` should be a non-negative integer, got {v}")),
    }
}

fn is_size_token(tok: &str) -> bool {
    let Some(num) = tok.strip_suffix(['B', 'M', 'K', 'T']) else {
        return false;
    };
    !num.is_empty() && num.parse::<f64>().is_ok()
}

/// Splits llama-bench's `model_type` ("qwen2 1.5B Q4_K - Medium") into the
/// model part and the quantization label.
fn split_model_type(model_type: &str) -> (String, Option<String>) {
    let tokens: Vec<&str> = model_type.split_whitespace().collect();
    match tokens.iter().position(|t| is_size_token(t)) {
        Some(i) if i + 1 < tokens.len() => (tokens[..=i].join(" "), Some(tokens[i + 1..].join(" "))),
        _ => (model_type.trim().to_string(), None),
    }
}

fn quant_from_filename(path: &str) -> Option<String> {
    let lower = path.to_ascii_lowercase();
    [("q4_k_m", "Q4_K_M"), ("q8_0", "Q8_0"), ("fp16", "F16"), ("f16", "F16"), ("fp32", "F32"), ("f32", "F32")]
        .iter()
        .find(|(needle, _)| lower.contains(needle))
        .map(|(_, label)| label.to_string())
}

fn file_stem(path: &str) -> String {
    let base = path.rsplit(['/', '\\']).next().unwrap_or(path);
    base.strip_suffix(".gguf").unwrap_or(base).to_string()
}

/// Maps a llama.cpp quantization label onto a [`Precision`]; never guesses.
pub fn precision_from_quant_label(label: &str) -> Result<Precision> {
    match label.trim().to_ascii_uppercase().as_str() {
        "F16" | "FP16" => Ok(Precision::Fp16),
        "F32" | "FP32" | "ALL F32" => Ok(Precision::Fp32),
        "Q8_0" => Ok(Precision::Q8_0),
        "Q4_K_M" | "Q4_K - MEDIUM" => Ok(Precision::Q4KM),
        _ => Err(Error::Join(format!(
            "unknown quantization label `{label}` (known: F16, F32, Q8_0, Q4_K_M)"
        ))),
    }
}

fn parse_row(value: &Value) -> std::result::Result<Row, String> {
    let obj = value.as_object().ok_or("row is not an object")?;

    let model_type = str_field(obj, "model_type");
    let filename = str_field(obj, "model_filename");
    let (model_name, quant) = match (&model_type, &filename) {
        (Some(t), _) => {
            let (name, quant) = split_model_type(t);
            (name, quant.or_else(|| filename.as_deref().and_then(quant_from_filename)))
        }
        (None, Some(f)) => (file_stem(f), quant_from_filename(f)),
        (None, None) => return Err("missing `model_type` and `model_filename`".into()),
    };
    let n_params = uint_field(obj, "model_n_params")?.ok_or("missing `model_n_params`")?;
    let mut n_prompt = uint_field(obj, "n_prompt")?.ok_or("missing `n_prompt`")?;
    let n_gen = uint_field(obj, "n_gen")?.ok_or("missing `n_gen`")?;
    let n_depth = uint_field(obj, "n_depth")?.unwrap_or(0);
    let avg_ts = obj
        .get("avg_ts")
        .ok_or("missing `avg_ts`")?
        .as_f64()
        .filter(|v| *v > 0.0)
        .ok_or("`avg_ts` should be a positive number")?;
    let stddev_ts = obj.get("stddev_ts").and_then(Value::as_f64);

    let phase = match str_field(obj, "test") {
        Some(t) if t.starts_with("pp") => Phase::Prefill,
        Some(t) if t.starts_with("tg") => Phase::Decode,
        Some(t) => return Err(format!("unrecognized test label `{t}`")),
        None if n_gen == 0 && n_prompt > 0 => Phase::Prefill,
        None if n_prompt == 0 && n_gen > 0 => {
            // generation at depth d attends to a d-token prefix
            n_prompt = n_depth;
            Phase::Decode
        }
        None => {
            return Err(format!(
                "cannot tell prompt processing from generation (n_prompt={n_prompt}, n_gen={n_gen})"
            ))
        }
    };

    let backend = str_field(obj, "backends")
        .or_else(|| str_field(obj, "backend"))
        .unwrap_or_default();
    let device = str_field(obj, "gpu_info")
        .filter(|s| !s.is_empty())
        .or_else(|| str_field(obj, "cpu_info"))
        .unwrap_or_default();

    Ok(Row {
        model_name,
        quant_label: quant.unwrap_or_else(|| "unknown".into()),
        n_params,
        n_prompt,
        n_gen,
        phase,
        avg_ts,
        stddev_ts,
        backend,
        device,
        timestamp: str_field(obj, "test_time").unwrap_or_default(),
        build_commit: str_field(obj, "build_commit"),
    })
}

/// Parses a llama-bench `-o json` document.
///
/// Rows sharing model, quantization, prompt and generation lengths merge
/// into one record carrying both prefill and decode throughput.
pub fn parse_llama_bench(document: &str) -> Result<ParseReport> {
    let value: Value = serde_json::from_str(document)?;
    let rows = value
        .as_array()
        .ok_or_else(|| Error::Schema { path: ".".into(), message: "expected a JSON array of results".into() })?;

    let mut report = ParseReport::default();
    let mut index: HashMap<(String, String, u64, u64), usize> = HashMap::new();
    for (i, raw) in rows.iter().enumerate() {
        let row = match parse_row(raw) {
            Ok(r) => r,
            Err(message) => {
                report.errors.push(RowError { row: i, message });
                continue;
            }
        };
        let key = (row.model_name.clone(), row.quant_label.clone(), row.n_prompt, row.n_gen);
        let slot = *index.entry(key).or_insert_with(|| {
            report.records.push(RunRecord {
                model_name: row.model_name.clone(),
                model_n_params: row.n_params,
                quant_label: row.quant_label.clone(),
                n_prompt: row.n_prompt,
                n_gen: row.n_gen,
                prefill_tps: None,
                decode_tps: None,
                stddev_ts: None,
                backend: row.backend.clone(),
                device: row.device.clone(),
                timestamp: row.timestamp.clone(),
                build_commit: row.build_commit.clone(),
                memory: None,
            });
            report.records.len() - 1
        });
        let rec = &mut report.records[slot];
        match row.phase {
            Phase::Prefill => {
                rec.prefill_tps = Some(row.avg_ts);
                if rec.decode_tps.is_none() {
                    rec.stddev_ts = row.stddev_ts;
                }
            }
            Phase::Decode => {
                rec.decode_tps = Some(row.avg_ts);
                rec.stddev_ts = row.stddev_ts.or(rec.stddev_ts);
            }
        }
    }
    Ok(report)
}
