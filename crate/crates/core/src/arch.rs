//! Transformer architecture descriptions and the analytical decode cost model.
//!
//! Per-layer KV-cache sizes and attention/linear work follow the closed forms
//! for six attention mechanisms (MHA, GQA, MLA, GVA, GHA, GTA). The closed
//! forms count one unit per multiply-accumulate; [`FlopsConvention`] chooses
//! whether a MAC is reported as one or two FLOPs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precision::Precision;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttentionKind {
    #[serde(rename = "MHA")]
    Mha,
    #[serde(rename = "GQA")]
    Gqa,
    #[serde(rename = "MLA")]
    Mla,
    #[serde(rename = "GVA")]
    Gva,
    #[serde(rename = "GHA")]
    Gha,
    #[serde(rename = "GTA")]
    Gta,
}

impl AttentionKind {
    pub const ALL: [AttentionKind; 6] = [
        AttentionKind::Mha,
        AttentionKind::Gqa,
        AttentionKind::Mla,
        AttentionKind::Gva,
        AttentionKind::Gha,
        AttentionKind::Gta,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AttentionKind::Mha => "MHA",
            AttentionKind::Gqa => "GQA",
            AttentionKind::Mla => "MLA",
            AttentionKind::Gva => "GVA",
            AttentionKind::Gha => "GHA",
            AttentionKind::Gta => "GTA",
        }
    }
}

impl fmt::Display for AttentionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FfnKind {
    /// Gate, up and down projections (SwiGLU style).
    #[default]
    Gated,
    /// Up and down projections only.
    Plain,
}

impl FfnKind {
    fn matmuls(&self) -> u64 {
        match self {
            FfnKind::Gated => 3,
            FfnKind::Plain => 2,
        }
    }
}

/// How a multiply-accumulate is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlopsConvention {
    /// One FLOP per multiply-accumulate.
    Mac,
    /// Two FLOPs per multiply-accumulate, as hardware peaks are quoted.
    #[default]
    Fma,
}

impl FlopsConvention {
    pub fn factor(&self) -> f64 {
        match self {
            FlopsConvention::Mac => 1.0,
            FlopsConvention::Fma => 2.0,
        }
    }
}

impl std::str::FromStr for FlopsConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mac" => Ok(FlopsConvention::Mac),
            "fma" => Ok(FlopsConvention::Fma),
            _ => Err(Error::config(format!("unknown FLOPs convention `{s}` (mac, fma)"))),
        }
    }
}

/// Structural parameters of a decoder-only transformer.
///
/// Fields unused by the active attention variant may be absent. `n_h`
/// defaults to `n_q` (and vice versa) when only one is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawArch")]
pub struct ArchConfig {
    pub name: String,
    pub attention: AttentionKind,
    pub hidden_dim: u64,
    pub num_layers: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_q: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_k: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_v: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_h: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_c: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_h: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_l: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_c: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_rope: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_nope: Option<u64>,
    pub ffn_dim: u64,
    pub ffn_kind: FfnKind,
    pub vocab_size: u64,
    pub n_params: u64,
    pub tied_embeddings: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArch {
    name: String,
    attention: AttentionKind,
    hidden_dim: u64,
    num_layers: u64,
    n_q: Option<u64>,
    n_k: Option<u64>,
    n_v: Option<u64>,
    n_h: Option<u64>,
    n_c: Option<u64>,
    d_h: Option<u64>,
    d_l: Option<u64>,
    d_c: Option<u64>,
    d_rope: Option<u64>,
    d_nope: Option<u64>,
    ffn_dim: u64,
    #[serde(default)]
    ffn_kind: FfnKind,
    vocab_size: u64,
    n_params: u64,
    #[serde(default = "default_tied")]
    tied_embeddings: bool,
}

fn default_tied() -> bool {
    true
}

impl TryFrom<RawArch> for ArchConfig {
    type Error = Error;

    fn try_from(r: RawArch) -> Result<Self> {
        let cfg = ArchConfig {
            name: r.name,
            attention: r.attention,
            hidden_dim: r.hidden_dim,
            num_layers: r.num_layers,
            n_q: r.n_q.or(r.n_h),
            n_k: r.n_k,
            n_v: r.n_v,
            n_h: r.n_h.or(r.n_q),
            n_c: r.n_c,
            d_h: r.d_h,
            d_l: r.d_l,
            d_c: r.d_c,
            d_rope: r.d_rope,
            d_nope: r.d_nope,
            ffn_dim: r.ffn_dim,
            ffn_kind: r.ffn_kind,
            vocab_size: r.vocab_size,
            n_params: r.n_params,
            tied_embeddings: r.tied_embeddings,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ArchConfig {
    /// A config with only the common fields set; variant fields start absent.
    pub fn new(
        name: impl Into<String>,
        attention: AttentionKind,
        hidden_dim: u64,
        num_layers: u64,
        ffn_dim: u64,
        vocab_size: u64,
        n_params: u64,
    ) -> Self {
        ArchConfig {
            name: name.into(),
            attention,
            hidden_dim,
            num_layers,
            n_q: None,
            n_k: None,
            n_v: None,
            n_h: None,
            n_c: None,
            d_h: None,
            d_l: None,
            d_c: None,
            d_rope: None,
            d_nope: None,
            ffn_dim,
            ffn_kind: FfnKind::Gated,
            vocab_size,
            n_params,
            tied_embeddings: true,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        crate::error::from_json_str(text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("hidden_dim", Some(self.hidden_dim)),
            ("num_layers", Some(self.num_layers)),
            ("ffn_dim", Some(self.ffn_dim)),
            ("vocab_size", Some(self.vocab_size)),
            ("n_params", Some(self.n_params)),
            ("n_q", self.n_q),
            ("n_k", self.n_k),
            ("n_v", self.n_v),
            ("n_h", self.n_h),
            ("n_c", self.n_c),
            ("d_h", self.d_h),
            ("d_l", self.d_l),
            ("d_c", self.d_c),
        ];
        for (field, value) in positive {
            if value == Some(0) {
                return Err(Error::config(format!("{}: `{field}` must be positive", self.name)));
            }
        }
        self.require_variant_fields()?;
        match self.attention {
            AttentionKind::Mha => {
                let (n_q, d_h) = (self.req("n_q")?, self.req("d_h")?);
                if n_q * d_h != self.hidden_dim {
                    return Err(Error::config(format!(
                        "{}: MHA requires n_q*d_h == hidden_dim ({n_q}*{d_h} != {})",
                        self.name, self.hidden_dim
                    )));
                }
            }
            AttentionKind::Gqa => {
                let (n_q, n_k) = (self.req("n_q")?, self.req("n_k")?);
                if n_k > n_q || n_q % n_k != 0 {
                    return Err(Error::config(format!(
                        "{}: GQA requires n_k <= n_q and n_q % n_k == 0 (n_q={n_q}, n_k={n_k})",
                        self.name
                    )));
                }
            }
            AttentionKind::Mla => {
                if self.req("d_rope")? + self.req("d_nope")? == 0 {
                    return Err(Error::config(format!(
                        "{}: MLA requires d_rope + d_nope > 0",
                        self.name
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn required_fields(&self) -> &'static [&'static str] {
        match self.attention {
            AttentionKind::Mha => &["n_q", "n_h", "d_h"],
            AttentionKind::Gqa => &["n_q", "n_h", "n_k", "d_h"],
            AttentionKind::Mla => &["n_h", "d_c", "d_rope", "d_nope", "d_l"],
            AttentionKind::Gva => &["n_q", "n_h", "n_k", "d_h"],
            AttentionKind::Gha => &["n_q", "n_h", "n_k", "n_v", "d_h"],
            AttentionKind::Gta => &["n_q", "n_k", "n_c", "d_h", "d_l"],
        }
    }

    fn require_variant_fields(&self) -> Result<()> {
        for f in self.required_fields() {
            self.req(f)?;
        }
        Ok(())
    }

    fn field(&self, name: &str) -> Option<u64> {
        match name {
            "n_q" => self.n_q,
            "n_k" => self.n_k,
            "n_v" => self.n_v,
            "n_h" => self.n_h,
            "n_c" => self.n_c,
            "d_h" => self.d_h,
            "d_l" => self.d_l,
            "d_c" => self.d_c,
            "d_rope" => self.d_rope,
            "d_nope" => self.d_nope,
            _ => None,
        }
    }

    fn req(&self, name: &'static str) -> Result<u64> {
        self.field(name).ok_or(Error::MissingField {
            variant: self.attention.as_str(),
            field: name,
        })
    }

    /// Parameters held by the embedding (and untied output) matrices.
    pub fn embedding_params(&self) -> u64 {
        let table = self.hidden_dim * self.vocab_size;
        if self.tied_embeddings {
            table
        } else {
            2 * table
        }
    }

    /// KV-cache elements stored per token per layer.
    pub fn kv_elements_per_token(&self) -> Result<u64> {
        let h = self.hidden_dim;
        Ok(match self.attention {
            AttentionKind::Mha => 2 * self.req("n_h")? * self.req("d_h")?,
            AttentionKind::Gqa => 2 * self.req("n_k")? * self.req("d_h")?,
            AttentionKind::Mla => self.req("d_c")? + self.req("d_rope")?,
            AttentionKind::Gva => h + self.req("n_k")? * self.req("d_h")?,
            AttentionKind::Gha => (self.req("n_k")? + self.req("n_v")?) * self.req("d_h")?,
            AttentionKind::Gta => {
                self.req("n_k")? * self.req("d_h")? + self.req("n_c")? * self.req("d_l")?
            }
        })
    }

    /// Coefficient of N² in the full-sequence attention MAC count.
    pub fn attention_macs_coefficient(&self) -> Result<u64> {
        Ok(match self.attention {
            AttentionKind::Mha | AttentionKind::Gqa => 2 * self.req("n_h")? * self.req("d_h")?,
            AttentionKind::Mla => {
                self.req("n_h")? * (self.req("d_rope")? + 2 * self.req("d_nope")?)
            }
            AttentionKind::Gva | AttentionKind::Gha => {
                (self.req("n_q")? + self.req("n_h")?) * self.req("d_h")?
            }
            // key head dimension is d_h
            AttentionKind::Gta => self.req("n_q")? * (self.req("d_h")? + self.req("d_l")?),
        })
    }

    /// Projection MACs per token per layer (the linear column divided by N).
    pub fn linear_macs_per_token(&self) -> Result<u64> {
        let h = self.hidden_dim;
        Ok(match self.attention {
            AttentionKind::Mha => 4 * h * h,
            AttentionKind::Gqa | AttentionKind::Gva => {
                2 * h * h + 2 * self.req("n_k")? * self.req("d_h")? * h
            }
            AttentionKind::Mla => {
                let (d_c, d_rope, d_nope) =
                    (self.req("d_c")?, self.req("d_rope")?, self.req("d_nope")?);
                let (n_h, d_l) = (self.req("n_h")?, self.req("d_l")?);
                (d_c + d_rope) * h + n_h * (d_rope + d_nope) * h + 2 * n_h * d_l * d_nope + h * h
            }
            AttentionKind::Gha => {
                let d_h = self.req("d_h")?;
                h * h + (self.req("n_q")? + self.req("n_k")? + self.req("n_v")?) * d_h * h
            }
            AttentionKind::Gta => {
                let (d_h, d_l) = (self.req("d_h")?, self.req("d_l")?);
                let width = self.req("n_q")? * d_h
                    + self.req("n_k")? * d_h
                    + self.req("n_c")? * d_l
                    + d_l;
                2 * h * h + width * h
            }
        })
    }

    pub fn ffn_macs_per_token(&self) -> u64 {
        self.ffn_kind.matmuls() * self.hidden_dim * self.ffn_dim
    }
}

/// KV-cache elements held by one layer after `n_tokens` tokens.
pub fn kv_cache_elements_per_layer(arch: &ArchConfig, n_tokens: u64) -> Result<u64> {
    Ok(arch.kv_elements_per_token()? * n_tokens)
}

/// Full-sequence attention work for one layer over `n_tokens` tokens.
pub fn attention_flops_sequence(
    arch: &ArchConfig,
    n_tokens: u64,
    convention: FlopsConvention,
) -> Result<f64> {
    let n = n_tokens as f64;
    Ok(arch.attention_macs_coefficient()? as f64 * n * n * convention.factor())
}

/// Full-sequence projection work for one layer over `n_tokens` tokens.
pub fn linear_flops_sequence(
    arch: &ArchConfig,
    n_tokens: u64,
    convention: FlopsConvention,
) -> Result<f64> {
    Ok(arch.linear_macs_per_token()? as f64 * n_tokens as f64 * convention.factor())
}

/// Which estimate of W is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostMode {
    /// Per-component breakdown from the architecture.
    #[default]
    Detailed,
    /// One MAC per parameter per token; all work is booked as `flops_linear`.
    Approx,
}

impl std::str::FromStr for CostMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "detailed" => Ok(CostMode::Detailed),
            "approx" => Ok(CostMode::Approx),
            _ => Err(Error::config(format!("unknown cost mode `{s}` (detailed, approx)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostOptions {
    pub weight_precision: Precision,
    pub kv_precision: Precision,
    pub convention: FlopsConvention,
    pub mode: CostMode,
    pub include_lm_head: bool,
    pub kv_read: bool,
    pub kv_write: bool,
}

impl Default for CostOptions {
    fn default() -> Self {
        CostOptions {
            weight_precision: Precision::Fp16,
            kv_precision: Precision::Fp16,
            convention: FlopsConvention::Fma,
            mode: CostMode::Detailed,
            include_lm_head: true,
            kv_read: true,
            kv_write: true,
        }
    }
}

impl CostOptions {
    /// Weights are the only traffic and W is the per-parameter estimate.
    pub fn weights_only(weight_precision: Precision) -> Self {
        CostOptions {
            weight_precision,
            mode: CostMode::Approx,
            include_lm_head: false,
            kv_read: false,
            kv_write: false,
            ..CostOptions::default()
        }
    }

    fn check(&self) -> Result<()> {
        for (what, p) in [("weight", self.weight_precision), ("kv", self.kv_precision)] {
            let b = p.bytes_per_weight();
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::config(format!("{what} precision has non-positive bytes ({b})")));
            }
        }
        Ok(())
    }
}

/// FLOPs (W) and bytes (Q) of one forward unit of work.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub flops_attention: f64,
    pub flops_linear: f64,
    pub flops_ffn: f64,
    pub flops_lm_head: f64,
    pub bytes_weights: f64,
    pub bytes_kv_read: f64,
    pub bytes_kv_write: f64,
}

impl CostBreakdown {
    pub fn w_total(&self) -> f64 {
        self.flops_attention + self.flops_linear + self.flops_ffn + self.flops_lm_head
    }

    pub fn q_total(&self) -> f64 {
        self.bytes_weights + self.bytes_kv_read + self.bytes_kv_write
    }

    /// Operational intensity W/Q in FLOPs per byte.
    pub fn oi(&self) -> Option<f64> {
        let q = self.q_total();
        (q > 0.0).then(|| self.w_total() / q)
    }

    pub fn scaled(&self, k: f64) -> CostBreakdown {
        CostBreakdown {
            flops_attention: self.flops_attention * k,
            flops_linear: self.flops_linear * k,
            flops_ffn: self.flops_ffn * k,
            flops_lm_head: self.flops_lm_head * k,
            bytes_weights: self.bytes_weights * k,
            bytes_kv_read: self.bytes_kv_read * k,
            bytes_kv_write: self.bytes_kv_write * k,
        }
    }

    fn add(&self, o: &CostBreakdown) -> CostBreakdown {
        CostBreakdown {
            flops_attention: self.flops_attention + o.flops_attention,
            flops_linear: self.flops_linear + o.flops_linear,
            flops_ffn: self.flops_ffn + o.flops_ffn,
            flops_lm_head: self.flops_lm_head + o.flops_lm_head,
            bytes_weights: self.bytes_weights + o.bytes_weights,
            bytes_kv_read: self.bytes_kv_read + o.bytes_kv_read,
            bytes_kv_write: self.bytes_kv_write + o.bytes_kv_write,
        }
    }
}

/// Cost of generating one token with `context` tokens visible (itself included).
pub fn decode_step_cost(arch: &ArchConfig, context: u64, opts: &CostOptions) -> Result<CostBreakdown> {
    if context == 0 {
        return Err(Error::domain("decode step needs a context of at least one token"));
    }
    opts.check()?;
    let conv = opts.convention.factor();
    let layers = arch.num_layers as f64;
    let n = context as f64;

    let mut cost = CostBreakdown {
        bytes_weights: arch.n_params as f64 * opts.weight_precision.bytes_per_weight(),
        ..CostBreakdown::default()
    };
    match opts.mode {
        CostMode::Detailed => {
            // one query row against `context` cached keys and values
            cost.flops_attention = layers * arch.attention_macs_coefficient()? as f64 * n * conv;
            cost.flops_linear = layers * arch.linear_macs_per_token()? as f64 * conv;
            cost.flops_ffn = layers * arch.ffn_macs_per_token() as f64 * conv;
            if opts.include_lm_head {
                cost.flops_lm_head = (arch.hidden_dim * arch.vocab_size) as f64 * conv;
            }
        }
        CostMode::Approx => {
            arch.kv_elements_per_token()?;
            cost.flops_linear = arch.n_params as f64 * conv;
        }
    }
    let kv_bytes = opts.kv_precision.bytes_per_weight();
    if opts.kv_read {
        cost.bytes_kv_read = layers * kv_cache_elements_per_layer(arch, context)? as f64 * kv_bytes;
    }
    if opts.kv_write {
        cost.bytes_kv_write = layers * kv_cache_elements_per_layer(arch, 1)? as f64 * kv_bytes;
    }
    Ok(cost)
}

/// Mean decode cost over the steps that extend a `start`-token context by
/// `steps` tokens (contexts `start+1 ..= start+steps`).
pub fn mean_decode_cost(
    arch: &ArchConfig,
    start: u64,
    steps: u64,
    opts: &CostOptions,
) -> Result<CostBreakdown> {
    if steps == 0 {
        return Err(Error::domain("mean decode cost over zero steps"));
    }
    let mut acc = CostBreakdown::default();
    for ctx in start + 1..=start + steps {
        acc = acc.add(&decode_step_cost(arch, ctx, opts)?);
    }
    Ok(acc.scaled(1.0 / steps as f64))
}

/// Cost of processing an `n_prompt`-token prompt in one pass.
///
/// Traffic is one weight read plus the KV entries written for the prompt;
/// the output head runs once for the final position.
pub fn prefill_cost(arch: &ArchConfig, n_prompt: u64, opts: &CostOptions) -> Result<CostBreakdown> {
    if n_prompt == 0 {
        return Err(Error::domain("prefill over an empty prompt"));
    }
    opts.check()?;
    let conv = opts.convention.factor();
    let layers = arch.num_layers as f64;
    let n = n_prompt as f64;
    let mut cost = CostBreakdown {
        bytes_weights: arch.n_params as f64 * opts.weight_precision.bytes_per_weight(),
        ..CostBreakdown::default()
    };
    match opts.mode {
        CostMode::Detailed => {
            cost.flops_attention = layers * attention_flops_sequence(arch, n_prompt, opts.convention)?;
            cost.flops_linear = layers * linear_flops_sequence(arch, n_prompt, opts.convention)?;
            cost.flops_ffn = layers * arch.ffn_macs_per_token() as f64 * n * conv;
            if opts.include_lm_head {
                cost.flops_lm_head = (arch.hidden_dim * arch.vocab_size) as f64 * conv;
            }
        }
        CostMode::Approx => {
            arch.kv_elements_per_token()?;
            cost.flops_linear = arch.n_params as f64 * n * conv;
        }
    }
    if opts.kv_write {
        cost.bytes_kv_write = layers
            * kv_cache_elements_per_layer(arch, n_prompt)? as f64
            * opts.kv_precision.bytes_per_weight();
    }
    Ok(cost)
}

/// Returns `arch` at depth `new_layers`, keeping width fixed.
///
/// Parameters split into the embedding block and equal per-layer blocks; the
/// rescaled count is rounded to the nearest integer.
pub fn scale_layers(arch: &ArchConfig, new_layers: u64) -> Result<ArchConfig> {
    if new_layers == 0 {
        return Err(Error::domain("layer count must be at least 1"));
    }
    let embed = arch.embedding_params();
    if arch.n_params <= embed {
        return Err(Error::config(format!(
            "{}: n_params ({}) does not exceed embedding parameters ({embed})",
            arch.name, arch.n_params
        )));
    }
    let per_layer = (arch.n_params - embed) as f64 / arch.num_layers as f64;
    let mut out = arch.clone();
    out.num_layers = new_layers;
    out.n_params = embed + (per_layer * new_layers as f64).round() as u64;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_mha() -> ArchConfig {
        let mut a = ArchConfig::new("tiny-mha", AttentionKind::Mha, 8, 2, 16, 10, 1000);
        a.n_q = Some(2);
        a.n_h = Some(2);
        a.d_h = Some(4);
        a
    }

    fn mla() -> ArchConfig {
        let mut a = ArchConfig::new("mla", AttentionKind::Mla, 2048, 4, 8192, 1000, 10_000_000);
        a.n_h = Some(16);
        a.d_c = Some(512);
        a.d_rope = Some(64);
        a.d_nope = Some(128);
        a.d_l = Some(512);
        a
    }

    #[test]
    fn kv_elements_examples() {
        let mut a = ArchConfig::new("m", AttentionKind::Mha, 2048, 1, 1, 1, 1);
        a.n_q = Some(16);
        a.n_h = Some(16);
        a.d_h = Some(128);
        assert_eq!(kv_cache_elements_per_layer(&a, 1024).unwrap(), 4_194_304);
        assert_eq!(kv_cache_elements_per_layer(&a, 0).unwrap(), 0);
        assert_eq!(kv_cache_elements_per_layer(&mla(), 100).unwrap(), 57_600);
    }

    #[test]
    fn missing_variant_field_is_named() {
        let mut a = mla();
        a.d_c = None;
        let err = kv_cache_elements_per_layer(&a, 4).unwrap_err();
        assert!(err.to_string().contains("`d_c`"), "{err}");
    }

    #[test]
    fn attention_flops_examples() {
        let a = tiny_mha();
        assert_eq!(attention_flops_sequence(&a, 3, FlopsConvention::Mac).unwrap(), 144.0);
        assert_eq!(attention_flops_sequence(&a, 3, FlopsConvention::Fma).unwrap(), 288.0);
        assert_eq!(attention_flops_sequence(&a, 0, FlopsConvention::Fma).unwrap(), 0.0);
    }

    #[test]
    fn decode_cost_bytes_example() {
        let opts = CostOptions {
            convention: FlopsConvention::Mac,
            include_lm_head: false,
            ..CostOptions::default()
        };
        let c = decode_step_cost(&tiny_mha(), 3, &opts).unwrap();
        assert_eq!(c.bytes_weights, 2000.0);
        assert_eq!(c.bytes_kv_read, 192.0);
        assert_eq!(c.bytes_kv_write, 64.0);
        assert_eq!(c.q_total(), 2256.0);
        // L * (2*n_h*d_h*N), L * 4H^2, L * 3*H*ffn
        assert_eq!(c.flops_attention, 2.0 * 16.0 * 3.0);
        assert_eq!(c.flops_linear, 2.0 * 256.0);
        assert_eq!(c.flops_ffn, 2.0 * 384.0);
        assert_eq!(c.flops_lm_head, 0.0);
    }

    #[test]
    fn weights_only_oi() {
        let a = tiny_mha();
        let fp16 = decode_step_cost(&a, 7, &CostOptions::weights_only(Precision::Fp16)).unwrap();
        assert_eq!(fp16.oi().unwrap(), 1.0);
        let q8 = decode_step_cost(&a, 7, &CostOptions::weights_only(Precision::Q8_0)).unwrap();
        assert!((q8.oi().unwrap() - 1.882_352_9).abs() < 1e-6);
    }

    #[test]
    fn decode_rejects_empty_context() {
        let err = decode_step_cost(&tiny_mha(), 0, &CostOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn scale_layers_identity_and_formula() {
        let mut a = ArchConfig::new("s", AttentionKind::Mha, 8, 2, 16, 10, 1160);
        a.n_q = Some(2);
        a.n_h = Some(2);
        a.d_h = Some(4);
        assert_eq!(scale_layers(&a, 2).unwrap(), a);
        // tied: embed = 80, per layer = (1160 - 80) / 2 = 540
        assert_eq!(scale_layers(&a, 3).unwrap().n_params, 80 + 3 * 540);
        a.tied_embeddings = false;
        a.n_params = 1160;
        // untied: embed = 160, per layer = 500
        assert_eq!(scale_layers(&a, 3).unwrap().n_params, 160 + 1500);
        assert!(scale_layers(&a, 0).is_err());
    }

    #[test]
    fn scale_layers_rounds() {
        let mut a = tiny_mha();
        a.num_layers = 3;
        a.n_params = 80 + 100; // per layer 33.33..
        assert_eq!(scale_layers(&a, 2).unwrap().n_params, 80 + 67);
    }

    #[test]
    fn validation() {
        let mut a = tiny_mha();
        a.d_h = Some(3);
        assert!(a.validate().is_err());

        let mut g = ArchConfig::new("g", AttentionKind::Gqa, 8, 1, 8, 8, 100);
        g.n_q = Some(4);
        g.n_h = Some(4);
        g.n_k = Some(3);
        g.d_h = Some(2);
        assert!(g.validate().is_err());
        g.n_k = Some(2);
        g.validate().unwrap();

        let mut m = mla();
        m.d_rope = Some(0);
        m.d_nope = Some(0);
        assert!(m.validate().is_err());
    }

    #[test]
    fn json_defaults_and_unknown_keys() {
        let text = r#"{"name":"x","attention":"GQA","hidden_dim":8,"num_layers":2,
            "n_q":4,"n_k":2,"d_h":2,"ffn_dim":16,"vocab_size":10,"n_params":500}"#;
        let a = ArchConfig::from_json(text).unwrap();
        assert_eq!(a.n_h, Some(4));
        assert!(a.tied_embeddings);
        assert_eq!(a.ffn_kind, FfnKind::Gated);
        let back = ArchConfig::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(back, a);

        let bad = text.replace("\"n_q\":4", "\"n_q\":4,\"heads\":4");
        let err = ArchConfig::from_json(&bad).unwrap_err();
        assert!(err.to_string().contains("heads"), "{err}");
    }
}
