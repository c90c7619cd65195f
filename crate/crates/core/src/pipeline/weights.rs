use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::clique::{cliques_within, Clique};
use crate::error::{Error, Result};
use crate::graph::{min_star_degree, PartiteGraph, Vertex};
use crate::rng::RandomSeed;
use crate::solver::{pack_cliques, Solver, Tiling};

/// Cluster weights `λ` (indexed by reduced-graph vertex) and clique weights
/// `ω` on cliques of the reduced graph, listed in lexicographic order with
/// zero weights omitted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightAssignment {
    pub lambda: Vec<usize>,
    pub omega: Vec<(Clique, usize)>,
}

impl WeightAssignment {
    /// `Σ_{K∋v} ω(K)`.
    pub fn load(&self, v: Vertex) -> usize {
        self.omega
            .iter()
            .filter(|(c, _)| c.contains(v))
            .map(|(_, w)| w)
            .sum()
    }

    /// Whether every cluster `v` has `Σ_{K∋v} ω(K) = λ(v)`.
    pub fn is_balanced(&self) -> bool {
        (0..self.lambda.len()).all(|v| self.load(v as Vertex) == self.lambda[v])
    }
}

/// Outcome of [`balance_weights`] with the lemma's hypotheses evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightReport {
    pub assignment: WeightAssignment,
    /// Every `λ(v)` lies within `(1 ± γ/4)` of the mean.
    pub lambda_spread_ok: bool,
    pub min_star_degree: usize,
    /// `(1 − 1/r + γ/2)k`.
    pub degree_required: f64,
    pub degree_ok: bool,
}

impl WeightReport {
    pub fn hypotheses_hold(&self) -> bool {
        self.lambda_spread_ok && self.degree_ok
    }
}

/// Integer weights on the cliques of `reduced` whose per-vertex sums equal
/// `lambda`.
///
/// Each vertex `v` is blown up into an independent set of `λ(v)` copies,
/// copies of adjacent vertices are joined, and a factor of the blow-up is
/// projected back: `ω(K)` counts the factor cliques landing in the blocks of
/// `K`. The per-part sums of `λ` must agree; the spread and degree
/// hypotheses are only reported.
pub fn balance_weights(
    reduced: &PartiteGraph,
    lambda: &[usize],
    gamma: f64,
    solver: &Solver,
) -> Result<WeightReport> {
    let (r, k) = (reduced.r(), reduced.n());
    if lambda.len() != r * k {
        return Err(Error::param(format!(
            "expected {} weights, got {}",
            r * k,
            lambda.len()
        )));
    }
    let sums: Vec<usize> = lambda.chunks(k).map(|c| c.iter().sum()).collect();
    if sums.iter().any(|&s| s != sums[0]) {
        return Err(Error::param(format!(
            "per-part weight sums differ: {sums:?}"
        )));
    }
    let mean = sums[0] as f64 / k as f64;
    let lambda_spread_ok = lambda
        .iter()
        .all(|&l| (l as f64 - mean).abs() <= gamma / 4.0 * mean + 1e-9);
    let delta = min_star_degree(reduced);
    let degree_required = (1.0 - 1.0 / r as f64 + gamma / 2.0) * k as f64;
    let degree_ok = delta as f64 + 1e-9 >= degree_required;

    let m = sums[0];
    let mut block_of = Vec::with_capacity(r * m);
    for part in lambda.chunks(k) {
        for (j, &l) in part.iter().enumerate() {
            block_of.extend(std::iter::repeat_n(j, l));
        }
    }
    let reduced_vertex = |h: usize| ((h / m) * k + block_of[h]) as Vertex;
    let mut omega: BTreeMap<Vec<Vertex>, usize> = BTreeMap::new();
    if m > 0 {
        let mut edges = Vec::new();
        for a in 0..r * m {
            for b in a + 1..r * m {
                if a / m != b / m && reduced.has_edge(reduced_vertex(a), reduced_vertex(b)) {
                    edges.push((a as Vertex, b as Vertex));
                }
            }
        }
        let blow_up = PartiteGraph::new(r, m, edges)?;
        let factor = solver.find_factor(&blow_up)?.ok_or_else(|| {
            Error::Infeasible(format!(
                "blow-up has no factor (weight spread ok: {lambda_spread_ok}, δ*(R) = {delta} vs required {degree_required:.2})"
            ))
        })?;
        for c in factor.cliques() {
            let key = c
                .vertices()
                .iter()
                .map(|&h| reduced_vertex(h as usize))
                .collect();
            *omega.entry(key).or_default() += 1;
        }
    }
    let assignment = WeightAssignment {
        lambda: lambda.to_vec(),
        omega: omega
            .into_iter()
            .map(|(vs, w)| (Clique::from_sorted(vs), w))
            .collect(),
    };
    if !assignment.is_balanced() {
        return Err(Error::Internal(
            "projected weights do not sum to lambda".into(),
        ));
    }
    Ok(WeightReport {
        assignment,
        lambda_spread_ok,
        min_star_degree: delta,
        degree_required,
        degree_ok,
    })
}

/// Outcome of [`balance_tuples`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub tiling: Tiling,
    /// Uncovered size of every cluster, `residues[i][j]`.
    pub residues: Vec<Vec<usize>>,
}

fn tuple_name(clique: &Clique, k: usize) -> String {
    let names: Vec<String> = clique
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, &v)| format!("V_{{{i},{}}}", v as usize - i * k))
        .collect();
    format!("({})", names.join(", "))
}

/// Removes vertex-disjoint cliques so that every cluster keeps exactly
/// `target` vertices.
///
/// `residual[i][j]` is the current cluster `V″_{ij}` and `reserved` marks
/// the vertices cliques may use. For each reduced clique `K` with
/// `ω(K) > 0`, in order, `ω(K)` disjoint cliques of `g` are taken inside the
/// still unused reserved vertices of `K`'s clusters: a seeded greedy pass
/// first, then an exact packing if the greedy pass falls short.
pub fn balance_tuples(
    g: &PartiteGraph,
    residual: &[Vec<Vec<Vertex>>],
    reserved: &[bool],
    weights: &WeightAssignment,
    target: usize,
    seed: RandomSeed,
    node_budget: Option<u64>,
) -> Result<BalanceReport> {
    let r = g.r();
    if residual.len() != r || reserved.len() != g.vertex_count() {
        return Err(Error::param(
            "residual clusters or reserved mask do not match the graph",
        ));
    }
    let k = residual[0].len();
    if residual.iter().any(|p| p.len() != k) || weights.lambda.len() != r * k {
        return Err(Error::param("cluster and weight counts disagree"));
    }
    for (i, part) in residual.iter().enumerate() {
        for (j, cluster) in part.iter().enumerate() {
            if cluster.len() != target + weights.lambda[i * k + j] {
                return Err(Error::param(format!(
                    "cluster V_{{{i},{j}}} has {} vertices, expected target {target} + lambda {}",
                    cluster.len(),
                    weights.lambda[i * k + j]
                )));
            }
        }
    }
    let mut used = vec![false; g.vertex_count()];
    let mut rng = seed.rng();
    let mut chosen = Vec::new();
    for (tuple, want) in &weights.omega {
        let want = *want;
        if want == 0 {
            continue;
        }
        let sets: Vec<Vec<Vertex>> = tuple
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                residual[i][v as usize - i * k]
                    .iter()
                    .copied()
                    .filter(|&u| reserved[u as usize] && !used[u as usize])
                    .collect()
            })
            .collect();
        let mut cliques = cliques_within(g, &sets)?.members;
        cliques.shuffle(&mut rng);
        let mut taken: Vec<usize> = Vec::new();
        let mut local = vec![false; g.vertex_count()];
        for (idx, c) in cliques.iter().enumerate() {
            if taken.len() == want {
                break;
            }
            if c.vertices().iter().all(|&u| !local[u as usize]) {
                c.vertices().iter().for_each(|&u| local[u as usize] = true);
                taken.push(idx);
            }
        }
        if taken.len() < want {
            taken = pack_cliques(&cliques, want, node_budget).map_err(|_| {
                Error::GuardExceeded(format!(
                    "packing budget exhausted in tuple {}",
                    tuple_name(tuple, k)
                ))
            })?;
        }
        if taken.len() < want {
            return Err(Error::Infeasible(format!(
                "tuple {}: only {} of {want} disjoint cliques present among {} candidates",
                tuple_name(tuple, k),
                taken.len(),
                cliques.len()
            )));
        }
        for &idx in taken.iter().take(want) {
            cliques[idx]
                .vertices()
                .iter()
                .for_each(|&u| used[u as usize] = true);
            chosen.push(cliques[idx].clone());
        }
    }
    let residues: Vec<Vec<usize>> = residual
        .iter()
        .map(|part| {
            part.iter()
                .map(|c| c.iter().filter(|&&u| !used[u as usize]).count())
                .collect()
        })
        .collect();
    if let Some((i, j)) = (0..r)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .find(|&(i, j)| residues[i][j] != target)
    {
        return Err(Error::Internal(format!(
            "cluster V_{{{i},{j}}} ends with {} vertices instead of {target}",
            residues[i][j]
        )));
    }
    Ok(BalanceReport {
        tiling: Tiling::new(chosen),
        residues,
    })
}
