//! Browser bindings: a roofline chart for one device, a decode cost
//! calculator and a layer/precision sweep.
//!
//! Each export has a plain Rust twin returning `Result<String, String>` so it
//! can be tested natively; the exported wrappers only convert errors.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use rooflinebench::arch::decode_step_cost;
use rooflinebench::report::{render_chart, run_sweep, CeilingSpec, ChartSpec, ScenarioShapes, SweepSpec, SweepValues};
use rooflinebench::roofline::predict_decode;
use rooflinebench::{
    catalog, phi, ridge, Basis, ComputePrecision, CostMode, CostOptions, PhiSpace, Precision, Provenance, RooflinePoint,
};

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

#[derive(Serialize)]
struct Entry {
    key: String,
    name: String,
}

/// Device and model names for the page's pickers.
pub fn catalog_json() -> String {
    let devices: Vec<Entry> = catalog::hardware_profiles()
        .into_iter()
        .map(|p| Entry { key: catalog::slug(&p.name), name: p.name })
        .collect();
    let models: Vec<Entry> = catalog::architectures()
        .into_iter()
        .map(|a| Entry { key: catalog::slug(&a.name), name: a.name })
        .collect();
    serde_json::json!({ "devices": devices, "models": models }).to_string()
}

/// Chart of one device's ceiling with a user point and its Φ.
pub fn point_chart(device: &str, basis: &str, ceiling: &str, oi: f64, gflops: f64) -> Result<String, String> {
    let profile = catalog::hardware(device).map_err(err)?;
    let basis: Basis = basis.parse().map_err(err)?;
    let ceiling: ComputePrecision = ceiling.parse().map_err(err)?;
    let r = ridge(&profile, ceiling, basis).map_err(err)?;
    let point = RooflinePoint::new("your point", oi, gflops, Provenance::Measured).map_err(err)?.classified(&r);
    let raw = phi(&point, &r, PhiSpace::Raw);
    let log = phi(&point, &r, PhiSpace::Log10);
    let spec = ChartSpec {
        title: format!("{} ({basis} {ceiling})", profile.name),
        ceilings: vec![CeilingSpec::from_profile(&profile, ceiling, basis).map_err(err)?],
        points: vec![point],
        phi_annotations: true,
        phi_ceiling: 0,
        point_ceilings: Vec::new(),
    };
    let svg = render_chart(&spec).map_err(err)?;
    Ok(serde_json::json!({
        "svg": svg,
        "ridge_oi": r.oi_r,
        "peak_gflops": r.pi,
        "attainable_gflops": r.attainable(oi),
        "regime": raw.regime.to_string(),
        "phi_raw": raw.value,
        "phi_log10": log.value,
        "above_ceiling": raw.above_ceiling,
        "above_roof": gflops > r.attainable(oi),
    })
    .to_string())
}

/// Per-token decode cost of a catalog model and the bound it implies on a device.
pub fn decode_cost(model: &str, precision: &str, context: u64, mode: &str, device: &str, basis: &str) -> Result<String, String> {
    let arch = catalog::architecture(model).map_err(err)?;
    let precision: Precision = precision.parse().map_err(err)?;
    let mode: CostMode = mode.parse().map_err(err)?;
    let basis: Basis = basis.parse().map_err(err)?;
    let profile = catalog::hardware(device).map_err(err)?;
    let opts = CostOptions { weight_precision: precision, mode, ..CostOptions::default() };
    let cost = decode_step_cost(&arch, context, &opts).map_err(err)?;
    let oi = cost.oi().ok_or("no bytes moved")?;
    let key = precision.compute_key();
    // fall back to fp32 when the device lists no ceiling for this format
    let compute = if profile.peak(key, basis).is_ok() { key } else { ComputePrecision::Fp32 };
    let r = ridge(&profile, compute, basis).map_err(err)?;
    let timing = predict_decode(arch.n_params as f64, precision, &profile, compute, basis).map_err(err)?;
    let tps = r.attainable(oi) * 1e9 / cost.w_total();
    Ok(serde_json::json!({
        "model": arch.name,
        "device": profile.name,
        "ceiling": format!("{basis} {compute}"),
        "flops": {
            "attention": cost.flops_attention,
            "linear": cost.flops_linear,
            "ffn": cost.flops_ffn,
            "lm_head": cost.flops_lm_head,
            "total": cost.w_total(),
        },
        "bytes": {
            "weights": cost.bytes_weights,
            "kv_read": cost.bytes_kv_read,
            "kv_write": cost.bytes_kv_write,
            "total": cost.q_total(),
        },
        "oi": oi,
        "ridge_oi": r.oi_r,
        "regime": rooflinebench::classify(oi, &r).to_string(),
        "roofline_tps": tps,
        "param_bound_tps": timing.bound_tps,
    })
    .to_string())
}

/// Predicted points for a layer or precision sweep, drawn on one ceiling.
pub fn sweep_chart(model: &str, device: &str, basis: &str, axis: &str, values: &str, context: u64) -> Result<String, String> {
    let arch = catalog::architecture(model).map_err(err)?;
    let profile = catalog::hardware(device).map_err(err)?;
    let basis: Basis = basis.parse().map_err(err)?;
    let values = match axis {
        "layers" => SweepValues::Layers(
            values.split(',').map(|v| v.trim().parse::<u64>().map_err(|_| format!("`{v}` is not a layer count"))).collect::<Result<_, _>>()?,
        ),
        "precision" => SweepValues::Precision(values.split(',').map(|v| v.parse::<Precision>().map_err(err)).collect::<Result<_, _>>()?),
        other => return Err(format!("unknown axis `{other}` (layers, precision)")),
    };
    let ceiling = if profile.peak(ComputePrecision::Fp16, basis).is_ok() { ComputePrecision::Fp16 } else { ComputePrecision::Fp32 };
    let spec = SweepSpec {
        values,
        arch,
        profile: profile.clone(),
        basis,
        ceiling,
        cost: CostOptions::default(),
        context: context.max(1),
        shapes: ScenarioShapes::default(),
    };
    let points = run_sweep(&spec).map_err(err)?;
    let chart = ChartSpec {
        title: format!("{} on {}", spec.arch.name, profile.name),
        ceilings: vec![CeilingSpec::from_profile(&profile, ceiling, basis).map_err(err)?],
        points: points.clone(),
        phi_annotations: false,
        phi_ceiling: 0,
        point_ceilings: Vec::new(),
    };
    let rows: Vec<_> = points
        .iter()
        .map(|p| serde_json::json!({ "label": p.label, "oi": p.oi, "gflops": p.perf_gflops }))
        .collect();
    Ok(serde_json::json!({ "svg": render_chart(&chart).map_err(err)?, "points": rows }).to_string())
}

#[wasm_bindgen(js_name = catalog)]
pub fn catalog_js() -> String {
    catalog_json()
}

#[wasm_bindgen(js_name = pointChart)]
pub fn point_chart_js(device: &str, basis: &str, ceiling: &str, oi: f64, gflops: f64) -> Result<String, JsValue> {
    point_chart(device, basis, ceiling, oi, gflops).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = decodeCost)]
pub fn decode_cost_js(model: &str, precision: &str, context: u32, mode: &str, device: &str, basis: &str) -> Result<String, JsValue> {
    decode_cost(model, precision, context as u64, mode, device, basis).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = sweepChart)]
pub fn sweep_chart_js(model: &str, device: &str, basis: &str, axis: &str, values: &str, context: u32) -> Result<String, JsValue> {
    sweep_chart(model, device, basis, axis, values, context as u64).map_err(|e| JsValue::from_str(&e))
}
