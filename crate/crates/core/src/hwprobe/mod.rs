//! Host-CPU bandwidth and compute probes that produce hardware profiles.
//!
//! Bandwidth comes from STREAM-style kernels over DRAM-sized buffers,
//! compute from independent FMA chains. Each reported figure is the best
//! per-size (or per-kernel) median, since a roofline ceiling is a peak.

pub mod kernels;

use std::collections::BTreeMap;
use std::sync::{Barrier, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precision::ComputePrecision;
use crate::roofline::{ArchitectureClass, Basis, CeilingPair, HardwareProfile};
use kernels::{StreamKernel, FMA_CHAINS, FMA_UNROLL};

pub const MIB: u64 = 1 << 20;
pub const GIB: u64 = 1 << 30;
/// Smallest buffer accepted for bandwidth runs.
pub const MIN_BUFFER_BYTES: u64 = 64 * MIB;
/// Minimum timer ticks a single trial must span.
pub const MIN_TICKS_PER_TRIAL: u32 = 50;

static PROBE_LOCK: Mutex<()> = Mutex::new(());

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Threads {
    All,
    #[serde(untagged)]
    Count(usize),
}

impl Threads {
    pub fn resolve(&self) -> usize {
        match self {
            Threads::All => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            Threads::Count(n) => (*n).max(1),
        }
    }
}

impl std::str::FromStr for Threads {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(Threads::All);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Threads::Count(n)),
            _ => Err(Error::config(format!("thread count must be a positive integer or `all`, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Bytes per array; each bandwidth run allocates three arrays.
    pub buffer_bytes: Vec<u64>,
    pub repetitions: u32,
    pub warmup: u32,
    pub threads: Threads,
    pub flops_precision: Vec<ComputePrecision>,
    /// Lower bound on the duration of one compute trial.
    pub min_trial: Duration,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            buffer_bytes: default_buffer_sizes(),
            repetitions: 10,
            warmup: 3,
            threads: Threads::All,
            flops_precision: vec![ComputePrecision::Fp32, ComputePrecision::Fp64],
            min_trial: Duration::from_millis(100),
        }
    }
}

/// Smallest size the probe accepts on this host.
pub fn min_buffer_bytes() -> u64 {
    MIN_BUFFER_BYTES.max(last_level_cache_bytes().unwrap_or(0).saturating_add(1))
}

/// {64 MiB, 256 MiB, 1 GiB}, with sizes at or below the cache raised to the next MiB above it.
fn default_buffer_sizes() -> Vec<u64> {
    let floor = min_buffer_bytes().div_ceil(MIB) * MIB;
    let mut sizes: Vec<u64> = [64 * MIB, 256 * MIB, GIB].iter().map(|&b| b.max(floor)).collect();
    sizes.dedup();
    sizes
}

impl ProbeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::config("probe repetitions must be at least 1"));
        }
        if self.warmup == 0 {
            return Err(Error::config("probe warmup must be at least 1"));
        }
        if self.buffer_bytes.is_empty() {
            return Err(Error::config("probe needs at least one buffer size"));
        }
        let floor = min_buffer_bytes();
        if let Some(small) = self.buffer_bytes.iter().find(|b| **b < floor) {
            return Err(Error::config(format!(
                "buffer of {small} bytes would be cache-resident; need at least {floor} bytes"
            )));
        }
        if self.flops_precision.contains(&ComputePrecision::Fp16) {
            return Err(Error::config("fp16 is not probed on the host CPU; declare it instead"));
        }
        Ok(())
    }
}

/// One timed measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub kernel: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub buffer_bytes: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<ComputePrecision>,
    pub threads: usize,
    pub seconds: f64,
    /// Bytes (bandwidth kernels) or FLOPs (compute kernels) per trial.
    pub work: f64,
    /// GB/s or GFLOPS.
    pub rate: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub bandwidth_gbps: Option<f64>,
    pub flops_gflops: BTreeMap<ComputePrecision, f64>,
    pub per_trial: Vec<Trial>,
    pub environment: Vec<String>,
    /// Downgrades, soft-check warnings and similar remarks.
    pub notes: Vec<String>,
}

impl ProbeResult {
    pub fn merge(mut self, other: ProbeResult) -> ProbeResult {
        self.bandwidth_gbps = other.bandwidth_gbps.or(self.bandwidth_gbps);
        self.flops_gflops.extend(other.flops_gflops);
        self.per_trial.extend(other.per_trial);
        for e in other.environment {
            if !self.environment.contains(&e) {
                self.environment.push(e);
            }
        }
        self.notes.extend(other.notes);
        self
    }
}

fn read_sys(path: &str) -> Option<String> {
    std::fs::read_to_string(path).ok().map(|s| s.trim().to_string())
}

/// Size of the largest cache reported for CPU 0, if the OS exposes it.
pub fn last_level_cache_bytes() -> Option<u64> {
    let mut best = None;
    for idx in 0..8 {
        let Some(size) = read_sys(&format!("/sys/devices/system/cpu/cpu0/cache/index{idx}/size")) else {
            continue;
        };
        let (num, mult) = match size.chars().last() {
            Some('K') => (&size[..size.len() - 1], 1024),
            Some('M') => (&size[..size.len() - 1], MIB),
            _ => (size.as_str(), 1),
        };
        if let Ok(n) = num.parse::<u64>() {
            best = best.max(Some(n * mult));
        }
    }
    best
}

fn available_memory_bytes() -> Option<u64> {
    let info = read_sys("/proc/meminfo")?;
    let line = info.lines().find(|l| l.starts_with("MemAvailable:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

pub fn host_environment() -> Vec<String> {
    let mut env = vec![
        format!("os={}", std::env::consts::OS),
        format!("arch={}", std::env::consts::ARCH),
        format!("logical_cpus={}", Threads::All.resolve()),
    ];
    if let Some(cpu) = read_sys("/proc/cpuinfo")
        .and_then(|s| s.lines().find(|l| l.starts_with("model name")).map(str::to_owned))
        .and_then(|l| l.split_once(':').map(|(_, v)| v.trim().to_string()))
    {
        env.push(format!("cpu={cpu}"));
    }
    if let Some(llc) = last_level_cache_bytes() {
        env.push(format!("llc_bytes={llc}"));
    }
    env
}

/// Smallest observable `Instant` increment.
pub fn timer_tick() -> Duration {
    let mut best = Duration::MAX;
    for _ in 0..200 {
        let t0 = Instant::now();
        let mut t1 = Instant::now();
        while t1 == t0 {
            t1 = Instant::now();
        }
        best = best.min(t1 - t0);
    }
    best
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        (values[m - 1] + values[m]) / 2.0
    }
}

fn try_alloc(n: usize, fill: f64) -> Option<Vec<f64>> {
    let mut v = Vec::new();
    v.try_reserve_exact(n).ok()?;
    v.resize(n, fill);
    Some(v)
}

/// Runs `passes` passes of `kernel` on up to `threads` threads over
/// disjoint chunks; returns wall time from common start to last finish.
fn run_stream_parallel(
    kernel: StreamKernel,
    arrays: (&mut [f64], &mut [f64], &mut [f64]),
    threads: usize,
    passes: u32,
) -> Duration {
    let (a, b, c) = arrays;
    let chunk = a.len().div_ceil(threads).max(1);
    let workers = a.len().div_ceil(chunk);
    let barrier = Barrier::new(workers + 1);
    std::thread::scope(|s| {
        for ((a, b), c) in a.chunks_mut(chunk).zip(b.chunks_mut(chunk)).zip(c.chunks_mut(chunk)) {
            let barrier = &barrier;
            s.spawn(move || {
                let mut arrays = kernels::Slices { a, b, c };
                barrier.wait();
                for _ in 0..passes {
                    kernels::stream_pass(kernel, &mut arrays, 3.0);
                }
                std::hint::black_box(&mut arrays);
                barrier.wait();
            });
        }
        barrier.wait();
        let t0 = Instant::now();
        barrier.wait();
        t0.elapsed()
    })
}

/// Runs `iterations` kernel iterations on each of `threads` threads.
fn run_fma_parallel(precision: ComputePrecision, threads: usize, iterations: u64) -> Duration {
    let barrier = Barrier::new(threads + 1);
    std::thread::scope(|s| {
        for t in 0..threads {
            let barrier = &barrier;
            s.spawn(move || {
                let y = 1e-3 * (t + 1) as f64;
                barrier.wait();
                let out = match precision {
                    ComputePrecision::Fp32 => kernels::fma_kernel_f32(iterations, 0.999, y as f32) as f64,
                    _ => kernels::fma_kernel_f64(iterations, 0.999, y),
                };
                std::hint::black_box(out);
                barrier.wait();
            });
        }
        barrier.wait();
        let t0 = Instant::now();
        barrier.wait();
        t0.elapsed()
    })
}

/// Measures sustained memory bandwidth with copy/scale/add/triad kernels.
pub fn measure_bandwidth(config: &ProbeConfig) -> Result<ProbeResult> {
    config.validate()?;
    let _guard = PROBE_LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let threads = config.threads.resolve();
    let tick = timer_tick();
    let min_trial = tick * MIN_TICKS_PER_TRIAL;
    let mut result = ProbeResult { environment: host_environment(), ..ProbeResult::default() };
    let cap = available_memory_bytes().map(|m| m / 4);

    let mut per_size: Vec<(u64, f64)> = Vec::new();
    for &requested in &config.buffer_bytes {
        let mut bytes = requested;
        if let Some(cap) = cap {
            if bytes > cap {
                result.notes.push(format!("buffer {requested} B capped to {cap} B by available memory"));
                bytes = cap;
            }
        }
        let arrays = loop {
            let n = (bytes / 8) as usize;
            match (try_alloc(n, 1.0), try_alloc(n, 2.0), try_alloc(n, 0.0)) {
                (Some(a), Some(b), Some(c)) => break Some((a, b, c)),
                _ if bytes / 2 >= MIN_BUFFER_BYTES => {
                    result.notes.push(format!("allocation of 3 x {bytes} B failed; retrying with {} B", bytes / 2));
                    bytes /= 2;
                }
                _ => break None,
            }
        };
        let Some((mut a, mut b, mut c)) = arrays else {
            result.notes.push(format!("skipped buffer {requested} B: allocation failed"));
            continue;
        };
        let n = a.len() as u64;

        for _ in 0..config.warmup {
            for k in StreamKernel::ALL {
                run_stream_parallel(k, (&mut a, &mut b, &mut c), threads, 1);
            }
        }
        let mut best_for_size = 0.0f64;
        for kernel in StreamKernel::ALL {
            let mut passes = 1u32;
            let mut rates = Vec::with_capacity(config.repetitions as usize);
            for _ in 0..config.repetitions {
                let mut dt = run_stream_parallel(kernel, (&mut a, &mut b, &mut c), threads, passes);
                while dt < min_trial {
                    passes *= 2;
                    dt = run_stream_parallel(kernel, (&mut a, &mut b, &mut c), threads, passes);
                }
                let work = (kernel.bytes_per_pass(n, 8) * passes as u64) as f64;
                let secs = dt.as_secs_f64();
                let rate = work / secs / 1e9;
                rates.push(rate);
                result.per_trial.push(Trial {
                    kernel: kernel.as_str().into(),
                    buffer_bytes: Some(n * 8),
                    precision: None,
                    threads,
                    seconds: secs,
                    work,
                    rate,
                });
            }
            best_for_size = best_for_size.max(median(&mut rates));
        }
        per_size.push((n * 8, best_for_size));
    }
    if per_size.is_empty() {
        return Err(Error::Probe("no buffer size could be allocated".into()));
    }
    result.notes.extend(bandwidth_monotonicity_warnings(&per_size, 0.2));
    result.bandwidth_gbps = per_size.iter().map(|(_, r)| *r).reduce(f64::max);
    Ok(result)
}

/// Warns where bandwidth grows with buffer size by more than `slack`.
pub fn bandwidth_monotonicity_warnings(per_size: &[(u64, f64)], slack: f64) -> Vec<String> {
    let mut sorted = per_size.to_vec();
    sorted.sort_by_key(|(b, _)| *b);
    sorted
        .windows(2)
        .filter(|w| w[1].1 > w[0].1 * (1.0 + slack))
        .map(|w| {
            format!(
                "bandwidth rose from {:.2} GB/s at {} B to {:.2} GB/s at {} B; smaller buffer may be noisy",
                w[0].1, w[0].0, w[1].1, w[1].0
            )
        })
        .collect()
}

/// Measures peak arithmetic throughput with independent FMA chains.
pub fn measure_flops(config: &ProbeConfig) -> Result<ProbeResult> {
    config.validate()?;
    let _guard = PROBE_LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let threads = config.threads.resolve();
    let min_trial = config.min_trial.max(timer_tick() * MIN_TICKS_PER_TRIAL);
    let mut result = ProbeResult { environment: host_environment(), ..ProbeResult::default() };

    for &precision in &config.flops_precision {
        // calibrate iterations until one trial spans `min_trial`
        let mut iterations = 1024u64;
        loop {
            let dt = run_fma_parallel(precision, threads, iterations);
            if dt >= min_trial || iterations >= 1 << 40 {
                break;
            }
            let scale = (min_trial.as_secs_f64() / dt.as_secs_f64().max(1e-9)).clamp(2.0, 64.0);
            iterations = (iterations as f64 * scale).ceil() as u64;
        }
        for _ in 0..config.warmup {
            run_fma_parallel(precision, threads, iterations / 4 + 1);
        }
        let work = kernels::fma_flops(FMA_CHAINS as u64, FMA_UNROLL, iterations, threads as u64) as f64;
        let mut rates = Vec::new();
        for _ in 0..config.repetitions {
            let secs = run_fma_parallel(precision, threads, iterations).as_secs_f64();
            let rate = work / secs / 1e9;
            rates.push(rate);
            result.per_trial.push(Trial {
                kernel: "fma".into(),
                buffer_bytes: None,
                precision: Some(precision),
                threads,
                seconds: secs,
                work,
                rate,
            });
        }
        result.flops_gflops.insert(precision, median(&mut rates));
    }
    Ok(result)
}

/// Builds a profile from probe results, taking name, class and theoretical
/// values from `declared` when given.
pub fn emit_profile(results: &ProbeResult, declared: Option<&HardwareProfile>) -> Result<HardwareProfile> {
    if results.bandwidth_gbps.is_none() && results.flops_gflops.is_empty() {
        return Err(Error::Probe("no measurement to emit".into()));
    }
    let mut profile = match declared {
        Some(d) => d.clone(),
        None => HardwareProfile {
            name: results
                .environment
                .iter()
                .find_map(|e| e.strip_prefix("cpu="))
                .unwrap_or("host cpu")
                .to_string(),
            architecture_class: ArchitectureClass::GeneralCPU,
            bandwidth_gbps: CeilingPair::default(),
            peak_gflops: BTreeMap::new(),
            source: String::new(),
            timestamp: String::new(),
        },
    };
    if let Some(bw) = results.bandwidth_gbps {
        profile.bandwidth_gbps.measured = Some(bw);
    }
    for (p, v) in &results.flops_gflops {
        profile.peak_gflops.entry(*p).or_default().measured = Some(*v);
    }
    profile.source = if declared.is_some() {
        "host probe (measured); declared values (theoretical)".into()
    } else {
        "host probe".into()
    };
    profile.timestamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    profile.validate()?;
    Ok(profile)
}

/// Measured-versus-theoretical comparison for one ceiling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SanityNote {
    pub ceiling: String,
    pub theoretical: f64,
    pub measured: f64,
    pub pass: bool,
}

impl std::fmt::Display for SanityNote {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: measured {} <= theoretical {}: {}",
            self.ceiling,
            self.measured,
            self.theoretical,
            if self.pass { "pass" } else { "FAIL" }
        )
    }
}

/// Checks every ceiling with both values present; measured should not exceed theoretical.
pub fn sanity_check(profile: &HardwareProfile) -> Vec<SanityNote> {
    let mut notes = Vec::new();
    let mut push = |ceiling: String, pair: &CeilingPair| {
        if let (Some(t), Some(m)) = (pair.get(Basis::Theoretical), pair.get(Basis::Measured)) {
            notes.push(SanityNote { ceiling, theoretical: t, measured: m, pass: m <= t });
        }
    };
    push("bandwidth_gbps".into(), &profile.bandwidth_gbps);
    for (p, pair) in &profile.peak_gflops {
        push(format!("peak_gflops.{p}"), pair);
    }
    notes
}
