mod common;

use proptest::prelude::*;
use rooflinebench::arch::{decode_step_cost, scale_layers};
use rooflinebench::report::{
    export_csv, fmt_coord, gap_analysis, render_chart, run_sweep, Axes, CeilingSpec, ChartSpec, PhiPair, ScenarioShapes,
    SweepSpec, SweepValues,
};
use rooflinebench::{
    catalog, phi, ridge, Basis, ComputePrecision, CostOptions, FlopsConvention, PhiSpace, Precision, Provenance,
    RooflinePoint, Scenario,
};

fn m1_chart(points: Vec<RooflinePoint>) -> ChartSpec {
    let m1 = catalog::hardware("m1-pro").unwrap();
    ChartSpec {
        title: "test".into(),
        ceilings: vec![CeilingSpec::from_profile(&m1, ComputePrecision::Fp16, Basis::Measured).unwrap()],
        points,
        phi_annotations: true,
        phi_ceiling: 0,
        point_ceilings: Vec::new(),
    }
}

fn attr<'a>(element: &'a str, name: &str) -> &'a str {
    let key = format!(" {name}=\"");
    let start = element.find(&key).unwrap() + key.len();
    let len = element[start..].find('"').unwrap();
    &element[start..start + len]
}

#[test]
fn memory_bound_phi_segment_ends_at_ridge() {
    let p = RooflinePoint::new("decode", 1.0, 154.0, Provenance::Measured).unwrap();
    let spec = m1_chart(vec![p]);
    let svg = render_chart(&spec).unwrap();
    let seg = svg.lines().find(|l| l.starts_with("<line class=\"phi\"")).unwrap();
    let r = spec.ceilings[0].ridge();
    let (x, y) = Axes::for_spec(&spec).map(r.oi_r, r.pi);
    assert_eq!(attr(seg, "x2"), fmt_coord(x));
    assert_eq!(attr(seg, "y2"), fmt_coord(y));
    let (x, y) = Axes::for_spec(&spec).map(1.0, 154.0);
    assert_eq!((attr(seg, "x1"), attr(seg, "y1")), (fmt_coord(x).as_str(), fmt_coord(y).as_str()));
}

#[test]
fn compute_bound_phi_segment_is_vertical() {
    let p = RooflinePoint::new("prefill", 200.0, 3000.0, Provenance::Measured).unwrap();
    let spec = m1_chart(vec![p]);
    let svg = render_chart(&spec).unwrap();
    let seg = svg.lines().find(|l| l.starts_with("<line class=\"phi\"")).unwrap();
    assert_eq!(attr(seg, "x1"), attr(seg, "x2"));
    let (_, y) = Axes::for_spec(&spec).map(200.0, spec.ceilings[0].peak_gflops);
    assert_eq!(attr(seg, "y2"), fmt_coord(y));
}

#[test]
fn chart_spec_json_round_trip() {
    let p = RooflinePoint::new("a", 1.0, 10.0, Provenance::Predicted).unwrap().with_scenario(Scenario::Lilo);
    let spec = m1_chart(vec![p]);
    let text = serde_json::to_string(&spec).unwrap();
    assert_eq!(ChartSpec::from_json(&text).unwrap(), spec);
    assert!(ChartSpec::from_json(r#"{"ceilings": "x"}"#).is_err());
}

#[test]
fn catalog_bandwidth_gaps_are_non_negative() {
    for p in catalog::hardware_profiles() {
        let g = gap_analysis(&p);
        assert!(g.bandwidth_gap_gbps.unwrap() >= 0.0, "{}", p.name);
    }
    let rtx = gap_analysis(&catalog::hardware("3090").unwrap());
    assert!((rtx.compute[&ComputePrecision::Fp32].compute_gap_gflops.unwrap() - 11300.0).abs() < 1e-9);
}

fn sweep(values: SweepValues, cost: CostOptions) -> SweepSpec {
    SweepSpec {
        values,
        arch: catalog::architecture("qwen2.5-1.5b").unwrap(),
        profile: catalog::hardware("m1-pro").unwrap(),
        basis: Basis::Measured,
        ceiling: ComputePrecision::Fp16,
        cost,
        context: 1024,
        shapes: ScenarioShapes::default(),
    }
}

#[test]
fn predicted_points_sit_on_the_ceiling() {
    let spec = sweep(SweepValues::Layers((2..=64).step_by(2).collect()), CostOptions::default());
    let r = ridge(&spec.profile, spec.ceiling, spec.basis).unwrap();
    for p in run_sweep(&spec).unwrap() {
        assert_eq!(p.perf_gflops, r.attainable(p.oi));
        assert_eq!(p.provenance, Provenance::Predicted);
    }
}

#[test]
fn precision_sweep_shifts_right() {
    let spec = sweep(
        SweepValues::Precision(vec![Precision::Fp16, Precision::Q8_0, Precision::Q4KM]),
        CostOptions::weights_only(Precision::Fp16),
    );
    let ois: Vec<f64> = run_sweep(&spec).unwrap().iter().map(|p| p.oi).collect();
    assert!(ois.windows(2).all(|w| w[1] > w[0]), "{ois:?}");
}

#[test]
fn layer_sweep_oi_constant_without_kv_and_varying_with_it() {
    let layers = vec![2, 4, 8, 16];
    let flat = run_sweep(&sweep(SweepValues::Layers(layers.clone()), CostOptions::weights_only(Precision::Fp16))).unwrap();
    assert!(flat.windows(2).all(|w| (w[0].oi - w[1].oi).abs() < 1e-12 * w[0].oi));

    let cost = CostOptions { convention: FlopsConvention::Fma, ..CostOptions::default() };
    let spec = sweep(SweepValues::Layers(vec![2, 4, 8]), cost);
    let points = run_sweep(&spec).unwrap();
    let ois: Vec<f64> = points.iter().map(|p| p.oi).collect();
    assert!(ois[0] != ois[1] && ois[1] != ois[2]);
    for (p, l) in points.iter().zip([2u64, 4, 8]) {
        // recompute from the enumeration oracle at this depth
        let a = scale_layers(&spec.arch, l).unwrap();
        let n = spec.context;
        let per_row = common::attention_macs(&a, 1) as f64; // one key per query row at N=1
        let attn = l as f64 * per_row * n as f64 * 2.0;
        let linear = (l * common::linear_macs_per_token(&a)) as f64 * 2.0;
        let ffn = (l * 3 * a.hidden_dim * a.ffn_dim) as f64 * 2.0;
        let head = (a.hidden_dim * a.vocab_size) as f64 * 2.0;
        let w = attn + linear + ffn + head;
        let q = a.n_params as f64 * 2.0 + (l * (common::kv_slots(&a, n) + common::kv_slots(&a, 1))) as f64 * 2.0;
        assert!((p.oi - w / q).abs() < 1e-12 * p.oi, "L={l}: {} vs {}", p.oi, w / q);
        let c = decode_step_cost(&a, n, &spec.cost).unwrap();
        assert_eq!(c.oi().unwrap(), p.oi);
    }
}

#[test]
fn scenario_sweep_labels_points() {
    let spec = sweep(SweepValues::Scenario(Scenario::ALL.to_vec()), CostOptions::default());
    let points = run_sweep(&spec).unwrap();
    let labels: Vec<Option<Scenario>> = points.iter().map(|p| p.scenario).collect();
    assert_eq!(labels, Scenario::ALL.map(Some).to_vec());
}

#[test]
fn sweep_errors_name_the_value() {
    let mut spec = sweep(SweepValues::Layers(vec![4]), CostOptions::default());
    spec.arch.n_params = 10;
    let err = run_sweep(&spec).unwrap_err().to_string();
    assert!(err.contains("sweep value 4"), "{err}");
    assert!(run_sweep(&sweep(SweepValues::Layers(vec![]), CostOptions::default())).is_err());
    assert!(run_sweep(&sweep(SweepValues::ContextLength(vec![0]), CostOptions::default())).is_err());
}

proptest! {
    #[test]
    fn export_round_trips_to_six_digits(
        raw in prop::collection::vec(("[a-z]{1,6}", -3.0f64..4.0, -2.0f64..5.0), 0..12)
    ) {
        let m1 = catalog::hardware("m1-pro").unwrap();
        let r = ridge(&m1, ComputePrecision::Fp16, Basis::Measured).unwrap();
        let points: Vec<RooflinePoint> = raw
            .iter()
            .map(|(l, x, y)| RooflinePoint::new(l.clone(), 10f64.powf(*x), 10f64.powf(*y), Provenance::Measured).unwrap())
            .collect();
        let phis: Vec<PhiPair> = points
            .iter()
            .map(|p| PhiPair { raw: phi(p, &r, PhiSpace::Raw), log10: phi(p, &r, PhiSpace::Log10) })
            .collect();
        let text = export_csv(&points, &phis).unwrap();
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut rows: Vec<(String, f64, f64, f64)> = reader
            .records()
            .map(|row| {
                let row = row.unwrap();
                (row[0].to_string(), row[2].parse().unwrap(), row[3].parse().unwrap(), row[5].parse().unwrap())
            })
            .collect();
        prop_assert_eq!(rows.len(), points.len());
        let mut expect: Vec<(String, f64, f64, f64)> = points
            .iter()
            .zip(&phis)
            .map(|(p, f)| (p.label.clone(), p.oi, p.perf_gflops, f.raw.value))
            .collect();
        expect.sort_by(|a, b| a.0.cmp(&b.0));
        rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        expect.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let close = |a: f64, b: f64| a == b || ((a - b) / b).abs() < 5e-6;
        for (got, want) in rows.iter().zip(&expect) {
            prop_assert_eq!(&got.0, &want.0);
            prop_assert!(close(got.1, want.1) && close(got.2, want.2) && close(got.3, want.3));
        }
    }
}
