//! Brute-force reference counts, written as explicit loops over tokens,
//! heads and dimensions instead of closed forms.

#![allow(dead_code)]

use std::collections::HashSet;

use rand::Rng;
use rooflinebench::{ArchConfig, AttentionKind};

fn get(v: Option<u64>) -> u64 {
    v.expect("variant field present")
}

/// What one layer caches for a single token, as (tensor, head count, width).
fn cached_tensors(a: &ArchConfig) -> Vec<(&'static str, u64, u64)> {
    let h = a.hidden_dim;
    match a.attention {
        AttentionKind::Mha => vec![("k", get(a.n_h), get(a.d_h)), ("v", get(a.n_h), get(a.d_h))],
        AttentionKind::Gqa => vec![("k", get(a.n_k), get(a.d_h)), ("v", get(a.n_k), get(a.d_h))],
        AttentionKind::Mla => vec![("latent", 1, get(a.d_c)), ("k_rope", 1, get(a.d_rope))],
        // values span the full hidden width
        AttentionKind::Gva => vec![("v", 1, h), ("k", get(a.n_k), get(a.d_h))],
        AttentionKind::Gha => vec![("k", get(a.n_k), get(a.d_h)), ("v", get(a.n_v), get(a.d_h))],
        AttentionKind::Gta => vec![("k", get(a.n_k), get(a.d_h)), ("tied", get(a.n_c), get(a.d_l))],
    }
}

/// Distinct cache slots one layer holds after `n` tokens.
pub fn kv_slots(a: &ArchConfig, n: u64) -> u64 {
    let mut slots = HashSet::new();
    for t in 0..n {
        for (name, heads, width) in cached_tensors(a) {
            for head in 0..heads {
                for d in 0..width {
                    slots.insert((t, name, head, d));
                }
            }
        }
    }
    slots.len() as u64
}

/// (score heads, score width, value heads, value width) for one query/key pair.
fn attention_shape(a: &ArchConfig) -> (u64, u64, u64, u64) {
    match a.attention {
        AttentionKind::Mha | AttentionKind::Gqa => (get(a.n_h), get(a.d_h), get(a.n_h), get(a.d_h)),
        AttentionKind::Mla => {
            let heads = get(a.n_h);
            (heads, get(a.d_rope) + get(a.d_nope), heads, get(a.d_nope))
        }
        AttentionKind::Gva | AttentionKind::Gha => (get(a.n_q), get(a.d_h), get(a.n_h), get(a.d_h)),
        AttentionKind::Gta => (get(a.n_q), get(a.d_h), get(a.n_q), get(a.d_l)),
    }
}

/// Multiply-accumulates of full (unmasked) attention over `n` tokens in one layer.
pub fn attention_macs(a: &ArchConfig, n: u64) -> u64 {
    let (sh, sw, vh, vw) = attention_shape(a);
    let mut macs = 0u64;
    for _query in 0..n {
        for _key in 0..n {
            for _ in 0..sh {
                for _ in 0..sw {
                    macs += 1;
                }
            }
            for _ in 0..vh {
                for _ in 0..vw {
                    macs += 1;
                }
            }
        }
    }
    macs
}

/// Projection matrices of one layer as (rows, cols).
pub fn projections(a: &ArchConfig) -> Vec<(u64, u64)> {
    let h = a.hidden_dim;
    match a.attention {
        AttentionKind::Mha => vec![(h, h), (h, h), (h, h), (h, h)],
        AttentionKind::Gqa | AttentionKind::Gva => {
            let kv = get(a.n_k) * get(a.d_h);
            vec![(h, h), (h, kv), (h, kv), (h, h)]
        }
        AttentionKind::Mla => {
            let (n_h, d_nope, d_rope, d_l) = (get(a.n_h), get(a.d_nope), get(a.d_rope), get(a.d_l));
            vec![
                (h, get(a.d_c) + d_rope),
                (h, n_h * (d_rope + d_nope)),
                (d_l, n_h * d_nope),
                (d_l, n_h * d_nope),
                (h, h),
            ]
        }
        AttentionKind::Gha => {
            let d = get(a.d_h);
            vec![(h, get(a.n_q) * d), (h, get(a.n_k) * d), (h, get(a.n_v) * d), (h, h)]
        }
        AttentionKind::Gta => {
            let (d_h, d_l) = (get(a.d_h), get(a.d_l));
            vec![
                (h, get(a.n_q) * d_h),
                (h, get(a.n_k) * d_h),
                (h, get(a.n_c) * d_l),
                (h, d_l),
                (h, h),
                (h, h),
            ]
        }
    }
}

/// Projection MACs for one token, one row-column product at a time.
pub fn linear_macs_per_token(a: &ArchConfig) -> u64 {
    let mut macs = 0;
    for (rows, cols) in projections(a) {
        for _ in 0..rows {
            for _ in 0..cols {
                macs += 1;
            }
        }
    }
    macs
}

/// A small random config of the given variant that passes validation.
pub fn random_config(kind: AttentionKind, rng: &mut impl Rng) -> ArchConfig {
    let mut small = |lo: u64, hi: u64| rng.gen_range(lo..=hi);
    let layers = small(1, 4);
    let ffn = small(1, 16);
    let vocab = small(1, 32);
    let mut a = ArchConfig::new(format!("rand-{kind}"), kind, 1, layers, ffn, vocab, 1);
    match kind {
        AttentionKind::Mha => {
            let (heads, d) = (small(1, 4), small(1, 4));
            a.hidden_dim = heads * d;
            a.n_q = Some(heads);
            a.n_h = Some(heads);
            a.d_h = Some(d);
        }
        AttentionKind::Gqa => {
            let (kv, group) = (small(1, 3), small(1, 3));
            a.hidden_dim = small(1, 16);
            a.n_k = Some(kv);
            a.n_q = Some(kv * group);
            a.n_h = Some(kv * group);
            a.d_h = Some(small(1, 4));
        }
        AttentionKind::Mla => {
            a.hidden_dim = small(1, 16);
            a.n_h = Some(small(1, 4));
            a.d_c = Some(small(1, 4));
            let rope = small(0, 3);
            a.d_rope = Some(rope);
            a.d_nope = Some(if rope == 0 { small(1, 3) } else { small(0, 3) });
            a.d_l = Some(small(1, 4));
        }
        AttentionKind::Gva | AttentionKind::Gha => {
            a.hidden_dim = small(1, 16);
            a.n_q = Some(small(1, 4));
            a.n_h = Some(small(1, 4));
            a.n_k = Some(small(1, 4));
            a.d_h = Some(small(1, 4));
            if kind == AttentionKind::Gha {
                a.n_v = Some(small(1, 4));
            }
        }
        AttentionKind::Gta => {
            a.hidden_dim = small(1, 16);
            a.n_q = Some(small(1, 4));
            a.n_k = Some(small(1, 4));
            a.n_c = Some(small(1, 4));
            a.d_h = Some(small(1, 4));
            a.d_l = Some(small(1, 4));
        }
    }
    // enough parameters for the embedding split used by layer scaling
    a.n_params = a.embedding_params() + layers * (linear_macs_per_token(&a) + 3 * a.hidden_dim * a.ffn_dim);
    a.validate().expect("random config is valid");
    a
}
