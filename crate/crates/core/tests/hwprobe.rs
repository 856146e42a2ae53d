use std::time::Duration;

use rooflinebench::hwprobe::kernels::{fma_flops, StreamKernel, FMA_CHAINS, FMA_UNROLL};
use rooflinebench::hwprobe::{
    emit_profile, measure_bandwidth, measure_flops, min_buffer_bytes, sanity_check, ProbeConfig, Threads,
};
use rooflinebench::{catalog, Basis, ComputePrecision, HardwareProfile};

fn quick() -> ProbeConfig {
    ProbeConfig {
        buffer_bytes: vec![min_buffer_bytes()],
        repetitions: 2,
        warmup: 1,
        threads: Threads::All,
        flops_precision: vec![ComputePrecision::Fp32, ComputePrecision::Fp64],
        min_trial: Duration::from_millis(20),
    }
}

#[test]
fn host_probe_emits_a_loadable_profile() {
    let cfg = quick();
    let bw = measure_bandwidth(&cfg).unwrap();
    assert!(bw.bandwidth_gbps.unwrap() > 0.0);
    for t in &bw.per_trial {
        let kernel = StreamKernel::ALL.into_iter().find(|k| k.as_str() == t.kernel).unwrap();
        let per_pass = kernel.bytes_per_pass(t.buffer_bytes.unwrap() / 8, 8) as f64;
        let passes = t.work / per_pass;
        assert_eq!(passes.fract(), 0.0, "{t:?}");
        assert!((passes as u64).is_power_of_two());
    }
    let fl = measure_flops(&cfg).unwrap();
    for t in &fl.per_trial {
        let per_iter = fma_flops(FMA_CHAINS as u64, FMA_UNROLL, 1, t.threads as u64) as f64;
        assert_eq!((t.work / per_iter).fract(), 0.0);
    }
    assert!(fl.flops_gflops.values().all(|v| *v > 0.0));

    let merged = bw.merge(fl);
    let profile = emit_profile(&merged, None).unwrap();
    let text = profile.to_json().unwrap();
    let loaded = HardwareProfile::from_json(&text).unwrap();
    assert_eq!(loaded, profile);
    assert!(rooflinebench::ridge(&loaded, ComputePrecision::Fp32, Basis::Measured).unwrap().oi_r > 0.0);
}

#[test]
fn declared_values_sit_beside_measurements() {
    let declared = catalog::hardware("raspberry").unwrap();
    let mut results = rooflinebench::hwprobe::ProbeResult::default();
    results.bandwidth_gbps = Some(3.98);
    results.flops_gflops.insert(ComputePrecision::Fp32, 78.56);
    let p = emit_profile(&results, Some(&declared)).unwrap();
    assert_eq!(p.bandwidth_gbps.theoretical, Some(17.1));
    let notes = sanity_check(&p);
    assert!(notes.iter().all(|n| n.pass), "{notes:?}");
}

#[test]
fn probe_configs_below_cache_are_rejected() {
    let cfg = ProbeConfig { buffer_bytes: vec![1 << 20], ..quick() };
    assert!(measure_bandwidth(&cfg).is_err());
}
