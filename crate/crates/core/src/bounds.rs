//! Tail bounds used by the sparsification arguments, evaluated exactly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clique::CliqueFamily;
use crate::error::{Error, Result};
use crate::graph::{binom2, PartiteGraph, Vertex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    Upper,
    Lower,
}

/// Chernoff bound for a sum of independent Bernoulli variables with mean
/// `lambda`: `e^{−a²λ/3}` for the upper tail (`0 < a < 3/2`) and `e^{−a²λ/2}`
/// for the lower tail (`0 < a < 1`).
pub fn chernoff_bound(lambda: f64, a: f64, tail: Tail) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::param(format!(
            "expectation {lambda} must be nonnegative"
        )));
    }
    let (limit, denom) = match tail {
        Tail::Upper => (1.5, 3.0),
        Tail::Lower => (1.0, 2.0),
    };
    if !(a > 0.0 && a < limit) {
        return Err(Error::param(format!(
            "deviation {a} outside (0, {limit}) for the {tail:?} tail"
        )));
    }
    Ok((-a * a * lambda / denom).exp())
}

/// Inputs shared by the Janson and Talagrand-type bounds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TailBoundInput {
    /// Expected count `λ`.
    pub lambda_exp: f64,
    /// `Δ̄`, diagonal pairs included.
    pub delta_bar: f64,
    /// Relative deviation for the Janson lower tail.
    pub a: f64,
    /// Median `M`.
    pub median_m: f64,
    /// Swap sensitivity `c`.
    pub change_c: f64,
    /// Certificate size factor `r`.
    pub proof_r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JansonMoments {
    pub lambda: f64,
    pub delta_bar: f64,
    /// Number of ordered pairs `(F, F′)` with intersecting vertex sets, keyed
    /// by `|E(F) ∪ E(F′)|`.
    pub pair_histogram: BTreeMap<usize, u64>,
}

/// Exact `λ = |F|·p^{binom(r,2)}` and
/// `Δ̄ = Σ_{F ∩ F′ ≠ ∅} p^{|E(F) ∪ E(F′)|}` over ordered pairs, diagonal
/// included.
pub fn janson_lambda_delta(family: &CliqueFamily, p: f64) -> Result<JansonMoments> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("probability {p} outside [0, 1]")));
    }
    let own_edges = binom2(family.r);
    let lambda = family.len() as f64 * p.powi(own_edges as i32);

    let mut by_vertex: BTreeMap<Vertex, Vec<usize>> = BTreeMap::new();
    for (idx, c) in family.iter().enumerate() {
        for &v in c.vertices() {
            by_vertex.entry(v).or_default().push(idx);
        }
    }
    let mut histogram: BTreeMap<usize, u64> = BTreeMap::new();
    let mut stamp = vec![usize::MAX; family.len()];
    for (a, fa) in family.iter().enumerate() {
        for &v in fa.vertices() {
            for &b in &by_vertex[&v] {
                if stamp[b] == a {
                    continue;
                }
                stamp[b] = a;
                // An edge of F′ lies in E(F) iff both endpoints are in F.
                let fresh = family.members[b]
                    .edges()
                    .filter(|&(x, y)| !(fa.contains(x) && fa.contains(y)))
                    .count();
                *histogram.entry(own_edges + fresh).or_default() += 1;
            }
        }
    }
    let delta_bar = histogram
        .iter()
        .map(|(&k, &c)| c as f64 * p.powi(k as i32))
        .sum();
    Ok(JansonMoments {
        lambda,
        delta_bar,
        pair_histogram: histogram,
    })
}

/// `Δ̄` via the shared-vertex shortcut `|E(F) ∪ E(F′)| = 2·binom(r,2) − binom(s,2)`
/// for cliques sharing `s` vertices. Kept as a cross-check of
/// [`janson_lambda_delta`].
pub fn delta_bar_by_shared_vertices(family: &CliqueFamily, p: f64) -> f64 {
    let own = binom2(family.r);
    let mut total = 0.0;
    for fa in family.iter() {
        for fb in family.iter() {
            let s = fa.shared_vertices(fb);
            if s > 0 {
                total += p.powi((2 * own - binom2(s)) as i32);
            }
        }
    }
    total
}

/// Janson lower tail `P[X ≤ (1−a)λ] ≤ exp(−a²λ²/(2Δ̄))`.
pub fn janson_lower_bound(input: &TailBoundInput) -> Result<f64> {
    let a = input.a;
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::param(format!("deviation {a} outside (0, 1)")));
    }
    if !(input.delta_bar > 0.0) {
        return Err(Error::param("Δ̄ must be positive"));
    }
    if !(input.lambda_exp >= 0.0) {
        return Err(Error::param("λ must be nonnegative"));
    }
    Ok((-a * a * input.lambda_exp * input.lambda_exp / (2.0 * input.delta_bar)).exp())
}

/// Talagrand-type bound for permutation functions,
/// `P[h(π) ≤ M − a] ≤ min(1, 2·exp(−a²/(16·r·c²·M)))`.
pub fn talagrand_bound(input: &TailBoundInput, a: f64) -> Result<f64> {
    if !(a >= 0.0) {
        return Err(Error::param(format!("deviation {a} must be nonnegative")));
    }
    for (name, value) in [
        ("M", input.median_m),
        ("c", input.change_c),
        ("r", input.proof_r),
    ] {
        if !(value > 0.0) {
            return Err(Error::param(format!(
                "{name} must be positive, got {value}"
            )));
        }
    }
    let exponent =
        a * a / (16.0 * input.proof_r * input.change_c * input.change_c * input.median_m);
    Ok((2.0 * (-exponent).exp()).min(1.0))
}

/// Number of members of `family` all of whose edges survive in `g`.
pub fn surviving_count(family: &CliqueFamily, g: &PartiteGraph) -> usize {
    family
        .iter()
        .filter(|c| c.edges().all(|(u, v)| g.has_edge(u, v)))
        .count()
}
