//! Pairwise Φ comparison between two sets of points.

use serde::Serialize;

use crate::roofline::{PhiResult, Regime, RooflinePoint};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiComparison {
    pub label_a: String,
    pub label_b: String,
    pub phi_a: f64,
    pub phi_b: f64,
    /// `phi_b - phi_a`; absent when the two values are not comparable.
    pub delta: Option<f64>,
    pub incomparable: Option<String>,
}

/// Why two potentials cannot be compared, if they cannot.
pub fn incomparability(a: &PhiResult, b: &PhiResult) -> Option<String> {
    if a.comparable_with(b) {
        return None;
    }
    let name = |r: Regime| match r {
        Regime::MemoryBound => "memory-bound",
        Regime::ComputeBound => "compute-bound",
    };
    Some(if a.regime != b.regime {
        format!("regimes differ ({} vs {})", name(a.regime), name(b.regime))
    } else if a.space != b.space {
        format!("spaces differ ({} vs {})", a.space, b.space)
    } else {
        format!(
            "ridges differ ({} {} at {:.2} vs {} {} at {:.2})",
            a.ridge.basis, a.ridge.precision, a.ridge.oi_r, b.ridge.basis, b.ridge.precision, b.ridge.oi_r
        )
    })
}

pub fn compare_phi(label_a: &str, a: &PhiResult, label_b: &str, b: &PhiResult) -> PhiComparison {
    let incomparable = incomparability(a, b);
    PhiComparison {
        label_a: label_a.to_string(),
        label_b: label_b.to_string(),
        phi_a: a.value,
        phi_b: b.value,
        delta: incomparable.is_none().then(|| b.value - a.value),
        incomparable,
    }
}

/// Last word of a point label, e.g. `decode` or `prefill`.
pub fn phase_of(label: &str) -> &str {
    label.split_whitespace().last().unwrap_or("")
}

/// Index pairs of points sharing a scenario and phase, in `a` order.
pub fn pair_points(a: &[RooflinePoint], b: &[RooflinePoint]) -> Vec<(usize, usize)> {
    let key = |p: &RooflinePoint| -> (Option<Scenario>, String) { (p.scenario, phase_of(&p.label).to_string()) };
    let mut used = vec![false; b.len()];
    let mut pairs = Vec::new();
    for (i, pa) in a.iter().enumerate() {
        let k = key(pa);
        if let Some(j) = (0..b.len()).find(|&j| !used[j] && key(&b[j]) == k) {
            used[j] = true;
            pairs.push((i, j));
        }
    }
    pairs
}
