use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use rooflinebench::HardwareProfile;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rooflinebench"));
    c.env_remove("RUST_LOG");
    for (k, _) in std::env::vars() {
        if k.starts_with("ROOFLINEBENCH_") {
            c.env_remove(k);
        }
    }
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/fixtures").join(name).to_string_lossy().into_owned()
}

#[test]
fn help_exits_zero_and_unknown_subcommand_exits_one() {
    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("analyze"));
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn predict_m1_pro_theoretical() {
    let o = run(&["predict", "--params", "1.5e9", "--precision", "fp16", "--profile", "catalog:m1-pro", "--basis", "theoretical"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("t_mem = 14.65 ms"), "{out}");
    assert!(out.contains("bound 68.3 tok/s"), "{out}");
}

#[test]
fn analyze_writes_report_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report");
    let o = bin()
        .args(["analyze", "--arch", "catalog:qwen2.5-1.5b", "--profile", "catalog:m1-pro", "--runs"])
        .arg(fixture("llama_bench_m1pro_qwen2.5-1.5b.json"))
        .arg("--mem")
        .arg(fixture("rss_trace_m1pro_qwen2.5-1.5b_fp16.csv"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut names: Vec<String> =
        std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    assert_eq!(names, ["chart.json", "gaps.json", "phi.csv", "points.csv", "roofline.svg"]);
    assert!(stdout(&o).contains("memory: peak"));
}

#[test]
fn wrong_model_is_a_user_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["analyze", "--arch", "catalog:qwen2.5-0.5b", "--profile", "catalog:m1-pro", "--runs", "catalog:fixture", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("1543714304"), "{}", stderr(&o));
}

#[test]
fn external_profile_is_accepted_by_analyze() {
    // same schema an accelerator probe writes: measured values, fp16 and fp32
    let profile = r#"{
  "name": "RTX 3090 (probe)",
  "architecture_class": "DiscreteGPU",
  "bandwidth_gbps": {"theoretical": 936.2, "measured": 812.5},
  "peak_gflops": {
    "fp32": {"theoretical": 35580.0, "measured": 23011.25},
    "fp16": {"measured": 67120.0}
  },
  "source": "gpu probe, cuda",
  "timestamp": "2025-06-01T12:00:00Z"
}
"#;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    std::fs::write(&path, profile).unwrap();
    let parsed = HardwareProfile::from_json(profile).unwrap();
    assert_eq!(HardwareProfile::from_json(&parsed.to_json().unwrap()).unwrap(), parsed);
    let o = bin()
        .args(["analyze", "--arch", "catalog:qwen2.5-1.5b", "--runs", "catalog:fixture", "--profile"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("r"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn host_probe_output_feeds_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("host.json");
    let o = bin().args(["probe", "--quick", "--out"]).arg(&path).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&path).unwrap();
    let p = HardwareProfile::from_json(&text).unwrap();
    assert!(p.bandwidth_gbps.measured.unwrap() > 0.0);
    let o = bin()
        .args(["analyze", "--arch", "catalog:qwen2.5-1.5b", "--runs", "catalog:fixture", "--ceiling", "fp32", "--profile"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("r"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn sweep_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["sweep", "--axis", "layers", "--values", "2..64", "--arch", "catalog:qwen2.5-1.5b", "--profile", "catalog:m1-pro", "--out"])
        .arg(dir.path().join("sweep"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 63);
    let rendered = std::fs::read_to_string(dir.path().join("sweep/roofline.svg")).unwrap();
    let replot = dir.path().join("replot.svg");
    let o = bin().arg("plot").arg("--chart").arg(dir.path().join("sweep/chart.json")).arg("--out").arg(&replot).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(&replot).unwrap(), rendered);

    let chart = r#"{"title": "t", "ceilings": [{"label": "x", "bandwidth_gbps": 100, "peak_gflops": 1000}],
        "points": [{"label": "a", "oi": 1.0, "perf_gflops": 50.0, "provenance": "measured"}], "phi_annotations": true}"#;
    let spec = dir.path().join("chart.json");
    std::fs::write(&spec, chart).unwrap();
    let svg = dir.path().join("c.svg");
    let o = bin().arg("plot").arg("--chart").arg(&spec).arg("--out").arg(&svg).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(std::fs::read_to_string(&svg).unwrap().contains("class=\"phi\""));

    let bad = r#"{"ceilings": [{"label": "x", "bandwidth_gbps": 100, "peak_gflops": 1000}],
        "points": [{"label": "zero", "oi": 0.0, "perf_gflops": 50.0, "provenance": "measured"}]}"#;
    std::fs::write(&spec, bad).unwrap();
    let o = bin().arg("plot").arg("--chart").arg(&spec).arg("--out").arg(&svg).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("zero"));
}

#[test]
fn compare_surfaces_incomparability() {
    let o = run(&[
        "compare", "--runs", "catalog:fixture", "catalog:fixture", "--arch", "catalog:qwen2.5-1.5b",
        "--profile", "catalog:m1-pro", "catalog:jetson",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("incomparable: ridges differ"));
    let o = run(&["compare", "--runs", "catalog:fixture", "catalog:fixture", "--arch", "catalog:qwen2.5-1.5b", "--profile", "catalog:m1-pro"]);
    assert!(stdout(&o).lines().all(|l| l.contains("delta +0.00")), "{}", stdout(&o));
}

#[test]
fn ingest_round_trips_through_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let runs = dir.path().join("runs.json");
    let o = bin().args(["ingest", "--runs", "catalog:fixture", "--out"]).arg(&runs).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let a = bin()
        .args(["analyze", "--arch", "catalog:qwen2.5-1.5b", "--profile", "catalog:m1-pro", "--runs"])
        .arg(&runs)
        .arg("--out")
        .arg(dir.path().join("a"))
        .output()
        .unwrap();
    let b = run(&["analyze", "--arch", "catalog:qwen2.5-1.5b", "--profile", "catalog:m1-pro", "--runs", "catalog:fixture", "--out", dir.path().join("b").to_str().unwrap()]);
    assert_eq!(stdout(&a), stdout(&b));
    let read = |d: &str| std::fs::read(dir.path().join(d).join("points.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
}

#[test]
fn config_file_env_and_flags_layer_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"phi_space": "log10"}"#).unwrap();
    let base = ["compare", "--runs", "catalog:fixture", "catalog:fixture", "--arch", "catalog:qwen2.5-1.5b", "--profile", "catalog:m1-pro", "--json"];
    let first_phi = |o: &Output| -> f64 {
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v[0]["phi_a"].as_f64().unwrap()
    };
    let raw = first_phi(&run(&base));
    let from_file = first_phi(&bin().arg("--config").arg(&cfg).args(base).output().unwrap());
    assert!(from_file < raw / 10.0);
    let env_raw = bin().arg("--config").arg(&cfg).args(base).env("ROOFLINEBENCH_PHI_SPACE", "raw").output().unwrap();
    assert_eq!(first_phi(&env_raw), raw);
    let flag_log = bin()
        .arg("--config")
        .arg(&cfg)
        .args(base)
        .args(["--phi-space", "log10"])
        .env("ROOFLINEBENCH_PHI_SPACE", "raw")
        .output()
        .unwrap();
    assert_eq!(first_phi(&flag_log), from_file);

    std::fs::write(&cfg, r#"{"phi_spcae": "log10"}"#).unwrap();
    let o = bin().arg("--config").arg(&cfg).args(["catalog", "devices"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("phi_spcae"));
    let o = bin().args(["catalog", "devices"]).env("ROOFLINEBENCH_CONVENTION", "flops").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn catalog_listing_and_dump() {
    let o = run(&["catalog", "devices"]);
    assert_eq!(stdout(&o).lines().count(), 5);
    let o = run(&["catalog", "devices", "jetson"]);
    let p = HardwareProfile::from_json(&stdout(&o)).unwrap();
    assert_eq!(p.bandwidth_gbps.measured, Some(59.4));
    let o = run(&["catalog", "models", "nope-model"]);
    assert_eq!(o.status.code(), Some(1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn malformed_inputs_exit_one(body in prop::collection::vec(any::<u8>(), 0..200), which in 0usize..4) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("input");
        std::fs::write(&path, &body).unwrap();
        let p = path.to_str().unwrap();
        let out = dir.path().join("out");
        let o = match which {
            0 => run(&["analyze", "--arch", p, "--profile", "catalog:m1-pro", "--runs", "catalog:fixture", "--out", out.to_str().unwrap()]),
            1 => run(&["analyze", "--arch", "catalog:qwen2.5-1.5b", "--profile", p, "--runs", "catalog:fixture", "--out", out.to_str().unwrap()]),
            2 => run(&["analyze", "--arch", "catalog:qwen2.5-1.5b", "--profile", "catalog:m1-pro", "--runs", p, "--out", out.to_str().unwrap()]),
            _ => run(&["plot", "--chart", p, "--out", out.to_str().unwrap()]),
        };
        prop_assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    }
}
