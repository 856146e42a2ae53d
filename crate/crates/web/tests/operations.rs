use rooflinebench_web::{catalog_json, decode_cost, point_chart, sweep_chart};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn catalog_lists_everything() {
    let v = parse(&catalog_json());
    assert_eq!(v["devices"].as_array().unwrap().len(), 5);
    assert!(v["models"].as_array().unwrap().len() >= 6);
}

#[test]
fn point_chart_scores_a_memory_bound_point() {
    let v = parse(&point_chart("m1-pro", "measured", "fp16", 1.0, 154.0).unwrap());
    assert_eq!(v["regime"], "MemoryBound");
    assert!(v["svg"].as_str().unwrap().starts_with("<svg"));
    assert!((v["ridge_oi"].as_f64().unwrap() - 4610.0 / 120.03).abs() < 1e-9);
    // over the bandwidth roof but under the peak: flagged on the chart, Φ not clamped
    assert!(v["above_roof"].as_bool().unwrap());
    assert!(!v["above_ceiling"].as_bool().unwrap());
    assert!(v["phi_raw"].as_f64().unwrap() > 0.0);
}

#[test]
fn point_chart_reports_errors_as_text() {
    let e = point_chart("m1-pro", "theoretical", "fp16", 1.0, 10.0).unwrap_err();
    assert!(e.contains("fp16"), "{e}");
    assert!(point_chart("m1-pro", "measured", "fp32", 0.0, 10.0).is_err());
    assert!(point_chart("toaster", "measured", "fp32", 1.0, 10.0).is_err());
}

#[test]
fn decode_cost_approx_matches_two_params_per_token() {
    let v = parse(&decode_cost("qwen2.5-1.5b", "fp16", 1024, "approx", "m1-pro", "theoretical").unwrap());
    assert_eq!(v["flops"]["total"].as_f64().unwrap(), 2.0 * 1543714304.0);
    assert_eq!(v["ceiling"], "theoretical fp32");
    assert_eq!(v["regime"], "MemoryBound");
    let bound = v["param_bound_tps"].as_f64().unwrap();
    assert!((bound - 204.8e9 / (2.0 * 1543714304.0)).abs() < 1e-6);
}

#[test]
fn sweep_chart_draws_one_point_per_value() {
    let v = parse(&sweep_chart("llama-3.2", "jetson", "measured", "precision", "fp16,q8_0,q4_k_m", 512).unwrap());
    let pts = v["points"].as_array().unwrap();
    assert_eq!(pts.len(), 3);
    assert_eq!(v["svg"].as_str().unwrap().matches("<circle class=\"point").count(), 3);
    assert!(sweep_chart("llama-3.2", "jetson", "measured", "depth", "1", 1).is_err());
    assert!(sweep_chart("llama-3.2", "jetson", "measured", "layers", "2,x", 1).is_err());
}
