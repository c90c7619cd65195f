//! Exact `K_r`-factor search, counting, uniform sampling, maximum tilings and
//! empirical spread.
//!
//! Every exact operation reduces to [`ExactCover`] with one column per vertex
//! and one row per transversal clique. Rows are ordered by ascending degree
//! sum in the host, ties broken lexicographically, and branching always takes
//! the vertex with the fewest remaining cliques.

use std::collections::HashMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::clique::{walk_cliques, Clique};
use crate::error::{Error, Result};
use crate::exact_cover::{Aborted, ExactCover};
use crate::graph::{PartiteGraph, Vertex};
use crate::rng::RandomSeed;

/// Vertex-disjoint cliques, sorted lexicographically.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tiling {
    pub cliques: Vec<Clique>,
}

impl Tiling {
    pub fn new(mut cliques: Vec<Clique>) -> Self {
        cliques.sort();
        Tiling { cliques }
    }

    pub fn size(&self) -> usize {
        self.cliques.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.cliques
            .iter()
            .flat_map(|c| c.vertices().iter().copied())
    }

    /// Appends the cliques of `other` and re-sorts.
    pub fn extend(&mut self, other: Tiling) {
        self.cliques.extend(other.cliques);
        self.cliques.sort();
    }
}

/// A tiling that covers every vertex of its host.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Factor(Tiling);

impl Factor {
    /// Wraps a tiling after checking that it covers all of `host`.
    pub fn new(host: &PartiteGraph, tiling: Tiling) -> Result<Self> {
        let lists: Vec<Vec<Vertex>> = tiling
            .cliques
            .iter()
            .map(|c| c.vertices().to_vec())
            .collect();
        crate::verify::verify_factor(host, &lists).map_err(|v| Error::Internal(v.to_string()))?;
        Ok(Factor(tiling))
    }

    pub(crate) fn from_tiling_unchecked(tiling: Tiling) -> Self {
        Factor(tiling)
    }

    pub fn cliques(&self) -> &[Clique] {
        &self.0.cliques
    }

    pub fn tiling(&self) -> &Tiling {
        &self.0
    }

    pub fn into_tiling(self) -> Tiling {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Refuse instances with more clique rows than this.
    pub row_budget: usize,
    /// Abort a single search after this many nodes.
    pub node_budget: Option<u64>,
    /// Refuse exact spread estimation when there are more factors than this.
    pub factor_budget: u128,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            row_budget: 5_000_000,
            node_budget: None,
            factor_budget: 1_000_000,
        }
    }
}

/// Exact solver operations under the budgets of a [`SolverConfig`].
#[derive(Clone, Copy, Debug, Default)]
pub struct Solver {
    pub config: SolverConfig,
}

struct CoverProblem {
    ec: ExactCover,
    cliques: Vec<Clique>,
}

impl CoverProblem {
    fn build(g: &PartiteGraph, row_budget: usize) -> Result<Self> {
        let all = full_mask(g);
        let mut rows: Vec<(usize, Vec<Vertex>)> = Vec::new();
        let mut over = false;
        walk_cliques(g, &all, &mut |vs| {
            if rows.len() < row_budget {
                let weight = vs.iter().map(|&v| g.degree(v)).sum();
                rows.push((weight, vs.to_vec()));
            } else {
                over = true;
            }
        });
        if over {
            return Err(Error::GuardExceeded(format!(
                "more than {row_budget} clique rows; use sampled mode or a smaller instance"
            )));
        }
        rows.sort();
        let mut ec = ExactCover::new(g.vertex_count());
        let mut cliques = Vec::with_capacity(rows.len());
        for (_, vs) in rows {
            ec.add_row(&vs);
            cliques.push(Clique::from_sorted(vs));
        }
        Ok(CoverProblem { ec, cliques })
    }

    fn tiling(&self, rows: &[usize]) -> Tiling {
        Tiling::new(rows.iter().map(|&r| self.cliques[r].clone()).collect())
    }
}

fn full_mask(g: &PartiteGraph) -> Vec<u64> {
    let mut mask = vec![0u64; g.words()];
    for v in 0..g.vertex_count() {
        mask[v / 64] |= 1 << (v % 64);
    }
    mask
}

fn aborted(_: Aborted) -> Error {
    Error::GuardExceeded("search node budget exhausted".into())
}

impl Solver {
    pub fn new(config: SolverConfig) -> Self {
        Solver { config }
    }

    pub fn find_factor(&self, g: &PartiteGraph) -> Result<Option<Factor>> {
        let prob = CoverProblem::build(g, self.config.row_budget)?;
        let rows = prob
            .ec
            .find_first(self.config.node_budget)
            .map_err(aborted)?;
        Ok(rows.map(|rows| Factor::from_tiling_unchecked(prob.tiling(&rows))))
    }

    pub fn count_factors(&self, g: &PartiteGraph) -> Result<u128> {
        let prob = CoverProblem::build(g, self.config.row_budget)?;
        prob.ec.count(self.config.node_budget).map_err(aborted)
    }

    /// Every factor, in search order.
    pub fn all_factors(&self, g: &PartiteGraph) -> Result<Vec<Factor>> {
        let prob = CoverProblem::build(g, self.config.row_budget)?;
        let mut out = Vec::new();
        let limit = self.config.factor_budget;
        let mut over = false;
        prob.ec
            .for_each_solution(self.config.node_budget, &mut |rows| {
                if out.len() as u128 >= limit {
                    over = true;
                    return false;
                }
                out.push(Factor::from_tiling_unchecked(prob.tiling(rows)));
                true
            })
            .map_err(aborted)?;
        if over {
            return Err(Error::GuardExceeded(format!(
                "more than {limit} factors; use sampled mode"
            )));
        }
        Ok(out)
    }

    pub fn sample_factor_uniform(&self, g: &PartiteGraph, seed: RandomSeed) -> Result<Factor> {
        let prob = CoverProblem::build(g, self.config.row_budget)?;
        let rows = prob
            .ec
            .sample_uniform(&mut seed.rng(), self.config.node_budget)
            .map_err(aborted)?;
        rows.map(|rows| Factor::from_tiling_unchecked(prob.tiling(&rows)))
            .ok_or(Error::NoFactor)
    }

    /// A maximum-cardinality tiling. Tries a factor first, then falls back to
    /// branch and bound for the best partial tiling.
    pub fn max_tiling(&self, g: &PartiteGraph) -> Result<Tiling> {
        if let Some(f) = self.find_factor(g)? {
            return Ok(f.into_tiling());
        }
        let prob = CoverProblem::build(g, self.config.row_budget)?;
        let target = g.n().saturating_sub(1);
        let best = pack_cliques(&prob.cliques, target, self.config.node_budget).map_err(aborted)?;
        Ok(prob.tiling(&best))
    }

    pub fn estimate_spread(
        &self,
        g: &PartiteGraph,
        max_subset: usize,
        mode: SpreadMode,
        seed: RandomSeed,
    ) -> Result<SpreadEstimate> {
        if max_subset == 0 {
            return Err(Error::param("max_subset must be at least 1"));
        }
        let (factors, total, exact_total) = match mode {
            SpreadMode::Exact => {
                let fs = self.all_factors(g)?;
                let total = fs.len() as u128;
                (fs, total, Some(total))
            }
            SpreadMode::Sampled { samples } => {
                if samples == 0 {
                    return Err(Error::param("sampled spread needs at least one sample"));
                }
                let prob = CoverProblem::build(g, self.config.row_budget)?;
                let mut rng = seed.rng();
                let mut fs = Vec::with_capacity(samples);
                for _ in 0..samples {
                    match prob
                        .ec
                        .sample_uniform(&mut rng, self.config.node_budget)
                        .map_err(aborted)?
                    {
                        Some(rows) => fs.push(Factor::from_tiling_unchecked(prob.tiling(&rows))),
                        None => return Err(Error::NoFactor),
                    }
                }
                (fs, samples as u128, None)
            }
        };
        if factors.is_empty() {
            return Err(Error::NoFactor);
        }
        let mut rows = Vec::new();
        for s in 1..=max_subset.min(g.n()) {
            let mut counts: HashMap<Vec<&Clique>, u128> = HashMap::new();
            for f in &factors {
                for subset in f.cliques().iter().combinations(s) {
                    *counts.entry(subset).or_insert(0) += 1;
                }
            }
            // Largest count, ties to the lexicographically smallest subset.
            let (witness, count) = counts
                .into_iter()
                .max_by(|(a, ca), (b, cb)| ca.cmp(cb).then_with(|| b.cmp(a)))
                .expect("factors are nonempty");
            let ratio = Ratio::new(count, total);
            let q = if s == 1 {
                ratio.to_f64()
            } else {
                ratio.to_f64().powf(1.0 / s as f64)
            };
            rows.push(SpreadRow {
                s,
                max_measure: ratio,
                q,
                witness: witness.into_iter().cloned().collect(),
            });
        }
        Ok(SpreadEstimate {
            mode,
            factors: exact_total,
            rows,
        })
    }
}

/// Largest set of pairwise disjoint cliques among `cliques`, as indices in
/// ascending order; stops early once `target` cliques are found.
///
/// Every clique is transversal, so it uses exactly one vertex of each part.
/// The search branches over the vertices of the part touched by the fewest
/// cliques ("anchors"): each anchor is either skipped or covered by one of
/// its cliques. The bound is the number of remaining anchors that still have
/// an available clique. A greedy pass seeds the incumbent.
pub fn pack_cliques(
    cliques: &[Clique],
    target: usize,
    node_budget: Option<u64>,
) -> Result<Vec<usize>, Aborted> {
    if cliques.is_empty() || target == 0 {
        return Ok(Vec::new());
    }
    let r = cliques[0].len();
    let max_vertex = cliques
        .iter()
        .flat_map(|c| c.vertices())
        .copied()
        .max()
        .unwrap_or(0) as usize;
    let anchor_part = (0..r)
        .min_by_key(|&p| cliques.iter().map(|c| c.in_part(p)).unique().count())
        .expect("r >= 1");
    let mut anchors: Vec<Vertex> = cliques
        .iter()
        .map(|c| c.in_part(anchor_part))
        .unique()
        .collect();
    anchors.sort_unstable();
    let by_anchor: Vec<Vec<usize>> = anchors
        .iter()
        .map(|&a| {
            (0..cliques.len())
                .filter(|&i| cliques[i].in_part(anchor_part) == a)
                .collect()
        })
        .collect();
    let target = target.min(anchors.len());
    let mut search = Packer {
        cliques,
        by_anchor,
        used: vec![false; max_vertex + 1],
        chosen: Vec::new(),
        best: Vec::new(),
        target,
        nodes: 0,
        budget: node_budget.unwrap_or(u64::MAX),
    };
    search.greedy();
    if search.best.len() < target {
        search.dfs(0)?;
    }
    let mut best = search.best;
    best.sort_unstable();
    Ok(best)
}

struct Packer<'a> {
    cliques: &'a [Clique],
    by_anchor: Vec<Vec<usize>>,
    used: Vec<bool>,
    chosen: Vec<usize>,
    best: Vec<usize>,
    target: usize,
    nodes: u64,
    budget: u64,
}

impl Packer<'_> {
    fn free(&self, idx: usize) -> bool {
        self.cliques[idx]
            .vertices()
            .iter()
            .all(|&v| !self.used[v as usize])
    }

    fn set(&mut self, idx: usize, value: bool) {
        for &v in self.cliques[idx].vertices() {
            self.used[v as usize] = value;
        }
    }

    fn greedy(&mut self) {
        for a in 0..self.by_anchor.len() {
            if let Some(&idx) = self.by_anchor[a].iter().find(|&&i| self.free(i)) {
                self.set(idx, true);
                self.chosen.push(idx);
            }
        }
        self.best = std::mem::take(&mut self.chosen);
        for idx in self.best.clone() {
            self.set(idx, false);
        }
    }

    fn dfs(&mut self, anchor: usize) -> Result<bool, Aborted> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Aborted);
        }
        if self.chosen.len() > self.best.len() {
            self.best = self.chosen.clone();
            if self.best.len() >= self.target {
                return Ok(true);
            }
        }
        if anchor == self.by_anchor.len() {
            return Ok(false);
        }
        let open = (anchor..self.by_anchor.len())
            .filter(|&a| self.by_anchor[a].iter().any(|&i| self.free(i)))
            .count();
        if self.chosen.len() + open <= self.best.len() {
            return Ok(false);
        }
        for k in 0..self.by_anchor[anchor].len() {
            let idx = self.by_anchor[anchor][k];
            if !self.free(idx) {
                continue;
            }
            self.set(idx, true);
            self.chosen.push(idx);
            let done = self.dfs(anchor + 1)?;
            self.chosen.pop();
            self.set(idx, false);
            if done {
                return Ok(true);
            }
        }
        self.dfs(anchor + 1)
    }
}

/// Exact spread uses every factor; sampled spread uses uniform samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpreadMode {
    Exact,
    Sampled { samples: usize },
}

/// A nonnegative fraction in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u128,
    pub den: u128,
}

impl Ratio {
    pub fn new(num: u128, den: u128) -> Self {
        assert!(den > 0, "zero denominator");
        let g = gcd(num, den);
        Ratio {
            num: num / g,
            den: den / g,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpreadRow {
    /// Subset size `|S|`.
    pub s: usize,
    /// Largest `ρ(⟨S⟩)` over clique sets `S` of size `s` contained in some
    /// factor, `ρ` being the uniform measure (or the empirical one).
    pub max_measure: Ratio,
    /// `max_measure^{1/s}`.
    pub q: f64,
    /// A maximizing `S`.
    pub witness: Vec<Clique>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpreadEstimate {
    pub mode: SpreadMode,
    /// Number of factors when computed exactly.
    pub factors: Option<u128>,
    pub rows: Vec<SpreadRow>,
}

impl SpreadEstimate {
    pub fn q(&self, s: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.s == s).map(|r| r.q)
    }
}

/// Exact factor search without budgets.
pub fn find_factor(g: &PartiteGraph) -> Option<Factor> {
    let solver = Solver::new(SolverConfig {
        row_budget: usize::MAX,
        ..SolverConfig::default()
    });
    solver
        .find_factor(g)
        .expect("unbounded search cannot exceed a guard")
}

pub fn count_factors(g: &PartiteGraph) -> Result<u128> {
    Solver::default().count_factors(g)
}

pub fn max_tiling(g: &PartiteGraph) -> Result<Tiling> {
    Solver::default().max_tiling(g)
}

pub fn sample_factor_uniform(g: &PartiteGraph, seed: RandomSeed) -> Result<Factor> {
    Solver::default().sample_factor_uniform(g, seed)
}

pub fn estimate_spread(
    g: &PartiteGraph,
    max_subset: usize,
    mode: SpreadMode,
    seed: RandomSeed,
) -> Result<SpreadEstimate> {
    Solver::default().estimate_spread(g, max_subset, mode, seed)
}
