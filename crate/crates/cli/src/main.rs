mod inputs;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rooflinebench::config::ToolConfig;
use rooflinebench::hwprobe::{self, ProbeConfig, Threads};
use rooflinebench::ingest::records_to_json;
use rooflinebench::report::{
    analyze, compare_phi, gap_analysis, pair_points, render_chart, run_sweep, Analysis, AnalyzeOptions, CeilingSpec,
    ChartSpec, PhiPair, ScenarioShapes, SweepSpec, SweepValues,
};
use rooflinebench::roofline::predict_decode;
use rooflinebench::{
    catalog, phi, ridge, Basis, ComputePrecision, CostOptions, Error, HardwareProfile, PhiSpace, Precision, Scenario,
};

/// Like `println!`, but a closed pipe (e.g. `| head`) is not an error.
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

fn emit(body: &str) {
    use std::io::Write as _;
    let _ = std::io::stdout().lock().write_all(body.as_bytes());
}

#[derive(Parser)]
#[command(name = "rooflinebench", version, about = "Roofline analysis of on-device LLM decoding")]
struct Cli {
    /// JSON config file; ROOFLINEBENCH_<KEY> variables and flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure this host's memory bandwidth and FMA throughput.
    Probe(ProbeArgs),
    /// Join benchmark runs with an architecture and score them against a device.
    Analyze(AnalyzeArgs),
    /// Predicted points across layers, precisions, scenarios or context lengths.
    Sweep(SweepArgs),
    /// Render a chart spec to SVG.
    Plot(PlotArgs),
    /// Decode-speed bound from parameter count and ceilings.
    Predict(PredictArgs),
    /// Compare Φ between two sets of runs.
    Compare(CompareArgs),
    /// Normalize llama-bench output into run-record JSON.
    Ingest(IngestArgs),
    /// List or dump bundled devices, models and fixtures.
    Catalog(CatalogArgs),
}

#[derive(Args)]
struct ProbeArgs {
    /// Measure bandwidth (default: both when neither is given).
    #[arg(long)]
    bandwidth: bool,
    /// Measure FMA throughput.
    #[arg(long)]
    flops: bool,
    /// Worker threads, or `all`.
    #[arg(long, default_value = "all")]
    threads: Threads,
    /// Per-array buffer size in MiB; repeatable.
    #[arg(long = "buffer-mib", value_name = "MIB")]
    buffer_mib: Vec<u64>,
    #[arg(long)]
    repetitions: Option<u32>,
    #[arg(long)]
    warmup: Option<u32>,
    /// One smallest-allowed buffer and few repetitions.
    #[arg(long)]
    quick: bool,
    /// Profile with theoretical values (file or catalog:<name>).
    #[arg(long)]
    declare: Option<String>,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Default)]
struct ModelFlags {
    /// mac or fma.
    #[arg(long)]
    convention: Option<String>,
    /// detailed or approx.
    #[arg(long)]
    mode: Option<String>,
    /// Largest token count considered short.
    #[arg(long)]
    boundary: Option<u64>,
    /// start, mid, end or exact-integral.
    #[arg(long)]
    context: Option<String>,
    /// raw or log10.
    #[arg(long = "phi-space")]
    phi_space: Option<String>,
    /// Leave KV-cache writes out of decode traffic.
    #[arg(long = "no-kv-write")]
    no_kv_write: bool,
    /// Leave the output head out of FLOPs.
    #[arg(long = "no-lm-head")]
    no_lm_head: bool,
}

impl ModelFlags {
    fn apply(&self, cfg: &mut ToolConfig) -> Result<()> {
        let pairs = [
            ("convention", self.convention.clone()),
            ("cost_mode", self.mode.clone()),
            ("scenario_boundary", self.boundary.map(|b| b.to_string())),
            ("decode_context", self.context.clone()),
            ("phi_space", self.phi_space.clone()),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        if self.no_kv_write {
            cfg.kv_write_traffic = false;
        }
        if self.no_lm_head {
            cfg.include_lm_head = false;
        }
        Ok(())
    }
}

#[derive(Args)]
struct CeilingFlags {
    /// Architecture file or catalog:<name>.
    #[arg(long)]
    arch: String,
    /// Hardware profile file or catalog:<name>.
    #[arg(long)]
    profile: String,
    #[arg(long, default_value = "measured")]
    basis: Basis,
    /// Compute ceiling; defaults to the one matching each run's weight format.
    #[arg(long)]
    ceiling: Option<ComputePrecision>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    target: CeilingFlags,
    /// llama-bench JSON, run-record JSON, or catalog:fixture.
    #[arg(long)]
    runs: String,
    /// RSS trace (timestamp_ms,rss_bytes) to attach to the runs.
    #[arg(long)]
    mem: Option<PathBuf>,
    /// Report directory.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    model: ModelFlags,
}

#[derive(Args)]
struct SweepArgs {
    /// layers, precision, scenario or context_length.
    #[arg(long)]
    axis: String,
    /// `2..64`, `2..64:2`, or a comma list (`fp16,q8_0,q4_k_m`, `SISO,LILO`).
    #[arg(long)]
    values: String,
    #[arg(long)]
    arch: String,
    #[arg(long)]
    profile: String,
    #[arg(long, default_value = "measured")]
    basis: Basis,
    /// Weight format for the layer, scenario and context axes.
    #[arg(long, default_value = "fp16")]
    precision: Precision,
    /// Compute ceiling; defaults to the one matching `--precision`.
    #[arg(long)]
    ceiling: Option<ComputePrecision>,
    /// Decode context for the layer and precision axes.
    #[arg(long = "at-context", default_value_t = 1024)]
    at_context: u64,
    /// Weights-only traffic and 2·n_params FLOPs.
    #[arg(long = "weights-only")]
    weights_only: bool,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    model: ModelFlags,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    chart: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Parameter count, e.g. 1.5e9.
    #[arg(long)]
    params: f64,
    #[arg(long, default_value = "fp16")]
    precision: Precision,
    #[arg(long)]
    profile: String,
    #[arg(long, default_value = "measured")]
    basis: Basis,
    /// Compute ceiling used for t_comp.
    #[arg(long, default_value = "fp32")]
    ceiling: ComputePrecision,
}

#[derive(Args)]
struct CompareArgs {
    /// Two run files.
    #[arg(long, num_args = 2, required = true)]
    runs: Vec<String>,
    /// One architecture for both, or one per run.
    #[arg(long, num_args = 1..=2, required = true)]
    arch: Vec<String>,
    /// One profile for both, or one per run.
    #[arg(long, num_args = 1..=2, required = true)]
    profile: Vec<String>,
    #[arg(long, default_value = "measured")]
    basis: Basis,
    #[arg(long)]
    ceiling: Option<ComputePrecision>,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    model: ModelFlags,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    runs: String,
    #[arg(long)]
    mem: Option<PathBuf>,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CatalogArgs {
    /// devices, models or fixture.
    kind: String,
    /// Dump this entry as JSON instead of listing.
    name: Option<String>,
}

fn load_config(path: Option<&Path>) -> Result<ToolConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("cannot read config `{}`", p.display()))?;
            ToolConfig::from_json(&text).with_context(|| format!("invalid config `{}`", p.display()))?
        }
        None => ToolConfig::default(),
    };
    cfg.apply_env(std::env::vars())?;
    Ok(cfg)
}

fn write_or_print(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, body).with_context(|| format!("cannot write `{}`", p.display())),
        None => {
            emit(body);
            Ok(())
        }
    }
}

fn probe(args: ProbeArgs) -> Result<()> {
    let (mut want_bw, mut want_fl) = (args.bandwidth, args.flops);
    if !want_bw && !want_fl {
        (want_bw, want_fl) = (true, true);
    }
    let declared = args.declare.as_deref().map(inputs::profile).transpose()?;
    if !want_bw && declared.as_ref().map_or(true, |d| d.bandwidth_gbps.theoretical.is_none()) {
        bail!("a profile needs a bandwidth ceiling: add --bandwidth or --declare a theoretical value");
    }
    let mut cfg = ProbeConfig { threads: args.threads, ..ProbeConfig::default() };
    if args.quick {
        cfg.buffer_bytes = vec![hwprobe::min_buffer_bytes()];
        cfg.repetitions = 3;
        cfg.warmup = 1;
        cfg.min_trial = Duration::from_millis(50);
    }
    if !args.buffer_mib.is_empty() {
        cfg.buffer_bytes = args.buffer_mib.iter().map(|m| m * hwprobe::MIB).collect();
    }
    if let Some(r) = args.repetitions {
        cfg.repetitions = r;
    }
    if let Some(w) = args.warmup {
        cfg.warmup = w;
    }
    let mut results = hwprobe::ProbeResult::default();
    if want_bw {
        results = results.merge(hwprobe::measure_bandwidth(&cfg)?);
    }
    if want_fl {
        results = results.merge(hwprobe::measure_flops(&cfg)?);
    }
    for n in &results.notes {
        eprintln!("note: {n}");
    }
    let profile = hwprobe::emit_profile(&results, declared.as_ref())?;
    for s in hwprobe::sanity_check(&profile) {
        eprintln!("sanity: {s}");
    }
    write_or_print(args.out.as_deref(), &profile.to_json()?)
}

fn report_summary(analysis: &Analysis) {
    for (p, f) in analysis.points.iter().zip(&analysis.phis) {
        say!(
            "{:<48} OI {:>9.3}  {:>10.2} GFLOPS  {:<12}  phi {:.2}{}",
            p.label,
            p.oi,
            p.perf_gflops,
            f.raw.regime.to_string(),
            f.raw.value,
            if f.raw.above_ceiling { "  (above ceiling)" } else { "" }
        );
    }
}

fn analyze_cmd(args: AnalyzeArgs, mut cfg: ToolConfig) -> Result<()> {
    args.model.apply(&mut cfg)?;
    let arch = inputs::arch(&args.target.arch)?;
    let profile = inputs::profile(&args.target.profile)?;
    let mut records = inputs::runs(&args.runs)?;
    if let Some(trace) = &args.mem {
        inputs::attach_memory(&mut records, trace)?;
        if let Some(m) = records.first().and_then(|r| r.memory) {
            say!("memory: peak {} B, steady {} B over {} samples", m.peak_bytes, m.steady_bytes, m.samples);
        }
    }
    let opts = AnalyzeOptions { join: cfg.join_options(), basis: args.target.basis, ceiling: args.target.ceiling };
    let analysis = analyze(&records, &arch, &profile, &opts)?;
    report_summary(&analysis);
    for path in analysis.write_to(&args.out)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn parse_range(text: &str) -> Result<Vec<u64>> {
    let text = text.trim();
    if let Some((lo, rest)) = text.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((hi, step)) => (hi, step.trim().parse::<u64>().context("bad step")?),
            None => (rest, 1),
        };
        let (lo, hi): (u64, u64) = (lo.trim().parse().context("bad range start")?, hi.trim().parse().context("bad range end")?);
        if step == 0 || lo > hi {
            bail!("empty range `{text}`");
        }
        return Ok((lo..=hi).step_by(step as usize).collect());
    }
    text.split(',')
        .map(|v| v.trim().parse::<u64>().with_context(|| format!("`{v}` is not a whole number")))
        .collect()
}

fn parse_list<T: std::str::FromStr<Err = Error>>(text: &str) -> Result<Vec<T>> {
    text.split(',').map(|v| v.trim().parse::<T>().map_err(anyhow::Error::from)).collect()
}

fn sweep_cmd(args: SweepArgs, mut cfg: ToolConfig) -> Result<()> {
    args.model.apply(&mut cfg)?;
    let values = match args.axis.as_str() {
        "layers" => SweepValues::Layers(parse_range(&args.values)?),
        "context_length" | "context" => SweepValues::ContextLength(parse_range(&args.values)?),
        "precision" => SweepValues::Precision(parse_list(&args.values)?),
        "scenario" => SweepValues::Scenario(parse_list::<Scenario>(&args.values)?),
        other => bail!("unknown sweep axis `{other}` (layers, precision, scenario, context_length)"),
    };
    let mut cost = if args.weights_only {
        CostOptions::weights_only(args.precision)
    } else {
        let mut c = cfg.join_options().cost_options(args.precision);
        c.include_lm_head = cfg.include_lm_head;
        c
    };
    cost.convention = cfg.convention;
    let profile = inputs::profile(&args.profile)?;
    let ceiling = args.ceiling.unwrap_or(args.precision.compute_key());
    let spec = SweepSpec {
        values,
        arch: inputs::arch(&args.arch)?,
        profile: profile.clone(),
        basis: args.basis,
        ceiling,
        cost,
        context: args.at_context,
        shapes: ScenarioShapes::default(),
    };
    let points = run_sweep(&spec)?;
    let r = ridge(&profile, ceiling, args.basis)?;
    let phis: Vec<PhiPair> =
        points.iter().map(|p| PhiPair { raw: phi(p, &r, PhiSpace::Raw), log10: phi(p, &r, PhiSpace::Log10) }).collect();
    for p in &points {
        say!("{:<40} OI {:>9.4}  {:>10.2} GFLOPS  {}", p.label, p.oi, p.perf_gflops, p.regime.map(|r| r.to_string()).unwrap_or_default());
    }
    let chart = ChartSpec {
        title: format!("{} {} sweep on {}", spec.arch.name, args.axis, profile.name),
        ceilings: vec![CeilingSpec::from_profile(&profile, ceiling, args.basis)?],
        points: points.clone(),
        phi_annotations: false,
        phi_ceiling: 0,
        point_ceilings: Vec::new(),
    };
    let analysis = Analysis { points, ridges: vec![r], phis, gaps: gap_analysis(&profile), chart };
    for path in analysis.write_to(&args.out)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn plot_cmd(args: PlotArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.chart).with_context(|| format!("cannot read `{}`", args.chart.display()))?;
    let spec = ChartSpec::from_json(&text).with_context(|| format!("invalid chart spec `{}`", args.chart.display()))?;
    let svg = render_chart(&spec)?;
    std::fs::write(&args.out, svg).with_context(|| format!("cannot write `{}`", args.out.display()))?;
    Ok(())
}

fn predict_cmd(args: PredictArgs) -> Result<()> {
    let profile = inputs::profile(&args.profile)?;
    let t = predict_decode(args.params, args.precision, &profile, args.ceiling, args.basis)?;
    let r = ridge(&profile, args.ceiling, args.basis)?;
    say!("device: {} ({} {} ceiling)", profile.name, args.basis, args.ceiling);
    say!("t_comp = {:.2} ms", t.t_comp * 1e3);
    say!("t_mem = {:.2} ms", t.t_mem * 1e3);
    say!("bound {:.1} tok/s", t.bound_tps);
    say!("OI {:.4} FLOPs/Byte vs ridge {:.2}: {}", t.oi, r.oi_r, t.regime);
    Ok(())
}

fn compare_cmd(args: CompareArgs, mut cfg: ToolConfig) -> Result<()> {
    args.model.apply(&mut cfg)?;
    let pick = |v: &[String], i: usize| v.get(i).unwrap_or(&v[0]).clone();
    let opts = AnalyzeOptions { join: cfg.join_options(), basis: args.basis, ceiling: args.ceiling };
    let mut sides = Vec::new();
    for i in 0..2 {
        let arch = inputs::arch(&pick(&args.arch, i))?;
        let profile: HardwareProfile = inputs::profile(&pick(&args.profile, i))?;
        let records = inputs::runs(&args.runs[i])?;
        sides.push(analyze(&records, &arch, &profile, &opts)?);
    }
    let (a, b) = (&sides[0], &sides[1]);
    let pick_phi = |p: &PhiPair| match cfg.phi_space {
        PhiSpace::Raw => p.raw,
        PhiSpace::Log10 => p.log10,
    };
    let comparisons: Vec<_> = pair_points(&a.points, &b.points)
        .into_iter()
        .map(|(i, j)| compare_phi(&a.points[i].label, &pick_phi(&a.phis[i]), &b.points[j].label, &pick_phi(&b.phis[j])))
        .collect();
    if comparisons.is_empty() {
        bail!("no runs share a scenario and phase");
    }
    if args.json {
        say!("{}", serde_json::to_string_pretty(&comparisons)?);
        return Ok(());
    }
    for c in &comparisons {
        let verdict = match (&c.delta, &c.incomparable) {
            (Some(d), _) => format!("delta {d:+.2}"),
            (None, Some(why)) => format!("incomparable: {why}"),
            (None, None) => String::new(),
        };
        say!("{} ({:.2})  vs  {} ({:.2})  {verdict}", c.label_a, c.phi_a, c.label_b, c.phi_b);
    }
    Ok(())
}

fn ingest_cmd(args: IngestArgs) -> Result<()> {
    let mut records = inputs::runs(&args.runs)?;
    if let Some(trace) = &args.mem {
        inputs::attach_memory(&mut records, trace)?;
    }
    let mut body = records_to_json(&records)?;
    body.push('\n');
    write_or_print(args.out.as_deref(), &body)
}

fn catalog_cmd(args: CatalogArgs) -> Result<()> {
    match (args.kind.as_str(), args.name) {
        ("devices", None) => {
            for p in catalog::hardware_profiles() {
                say!("{:<28} {}", catalog::slug(&p.name), p.name);
            }
        }
        ("devices", Some(n)) => emit(&catalog::hardware(&n)?.to_json()?),
        ("models", None) => {
            for a in catalog::architectures() {
                say!("{:<28} {} {} layers", catalog::slug(&a.name), a.attention, a.num_layers);
            }
        }
        ("models", Some(n)) => say!("{}", catalog::architecture(&n)?.to_json()?),
        ("fixture", _) => emit(catalog::LLAMA_BENCH_FIXTURE),
        (other, _) => bail!("unknown catalog kind `{other}` (devices, models, fixture)"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Probe(a) => probe(a),
        Command::Analyze(a) => analyze_cmd(a, cfg),
        Command::Sweep(a) => sweep_cmd(a, cfg),
        Command::Plot(a) => plot_cmd(a),
        Command::Predict(a) => predict_cmd(a),
        Command::Compare(a) => compare_cmd(a, cfg),
        Command::Ingest(a) => ingest_cmd(a),
        Command::Catalog(a) => catalog_cmd(a),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let internal = err.chain().any(|e| e.downcast_ref::<Error>().is_some_and(Error::is_internal));
    if internal {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
