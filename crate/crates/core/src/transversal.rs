//! Transversal `K_r`-factors of an indexed graph family.
//!
//! A family has `m = n·binom(r,2)` balanced r-partite graphs on shared parts.
//! Indices are split into consecutive blocks of `n`, one per part pair
//! `(i, j)`, `i < j`, in lexicographic order, so block `(i, j)` starts at
//! `c_{i,j} = n · rank(i, j)`. Given one permutation `π_i` per part, the
//! auxiliary graph `B_π` joins `s ∈ V_i` and `t ∈ V_j` (`i < j`) iff `st` is
//! an edge of the graph with index `c_{i,j} + local(π_i(s))`, where
//! `local(v) = v − i·n` is the 0-based position of `v` in its part. Every
//! `s ∈ V_i` thus reads its `V_j`-neighbourhood from exactly one graph of the
//! block, and a `K_r`-factor of `B_π` uses every index exactly once.
//!
//! All index arithmetic goes through [`GraphFamily::governing_index`].

use std::collections::BTreeMap;

use itertools::Itertools;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::clique::enumerate_kr;
use crate::error::{Error, Result};
use crate::exact_cover::ExactCover;
use crate::generate::random_balanced_partition;
use crate::graph::{binom2, degree_floor, min_star_degree, PartiteGraph, SimpleGraph, Vertex};
use crate::rng::RandomSeed;
use crate::solver::{Factor, Tiling};
use crate::verify::{verify_factor, Violation};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphFamily {
    r: usize,
    n: usize,
    graphs: Vec<PartiteGraph>,
    blocks: Vec<(usize, usize, usize)>,
}

impl GraphFamily {
    pub fn new(r: usize, n: usize, graphs: Vec<PartiteGraph>) -> Result<Self> {
        let m = n * binom2(r);
        if graphs.len() != m {
            return Err(Error::param(format!(
                "family with r = {r}, n = {n} needs {m} graphs, got {}",
                graphs.len()
            )));
        }
        if let Some(i) = graphs.iter().position(|g| (g.r(), g.n()) != (r, n)) {
            return Err(Error::param(format!(
                "graph {i} does not share the family's parts"
            )));
        }
        let blocks = (0..r)
            .flat_map(|i| (i + 1..r).map(move |j| (i, j)))
            .enumerate()
            .map(|(rank, (i, j))| (i, j, rank * n))
            .collect();
        Ok(GraphFamily {
            r,
            n,
            graphs,
            blocks,
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of graphs `m`.
    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn graphs(&self) -> &[PartiteGraph] {
        &self.graphs
    }

    pub fn graph(&self, idx: usize) -> &PartiteGraph {
        &self.graphs[idx]
    }

    /// `(i, j, c_{i,j})` in lexicographic order.
    pub fn blocks(&self) -> &[(usize, usize, usize)] {
        &self.blocks
    }

    /// `c_{i,j}` for `i < j`.
    pub fn offset(&self, i: usize, j: usize) -> usize {
        assert!(i < j && j < self.r, "offset needs i < j < r");
        // Pairs before (i, j): all pairs (s, ·) with s < i, then (i, i+1..j).
        let before = (0..i).map(|s| self.r - 1 - s).sum::<usize>() + (j - i - 1);
        before * self.n
    }

    /// Index of the graph that decides the edge `{s, t}` of `B_π`.
    pub fn governing_index(&self, bundle: &PermutationBundle, s: Vertex, t: Vertex) -> usize {
        let (s, t) = (s.min(t), s.max(t));
        let (i, j) = (s as usize / self.n, t as usize / self.n);
        let image = bundle.apply(i, s);
        self.offset(i, j) + (image as usize - i * self.n)
    }

    /// Edge-wise union of all members.
    pub fn union_graph(&self) -> PartiteGraph {
        let mut out = PartiteGraph::empty(self.r, self.n).expect("family shape is valid");
        for g in &self.graphs {
            for (u, v) in g.edges() {
                out.insert(u, v);
            }
        }
        out
    }

    /// Family whose every member is `K_{n,…,n}`.
    pub fn complete(r: usize, n: usize) -> Result<Self> {
        let g = PartiteGraph::complete(r, n)?;
        GraphFamily::new(r, n, vec![g; n * binom2(r)])
    }
}

/// One permutation per part; `perms[i][k]` is `π_i` of the `k`-th vertex of
/// part `i`, as a global id in part `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PermutationBundle {
    n: usize,
    perms: Vec<Vec<Vertex>>,
}

impl PermutationBundle {
    pub fn new(n: usize, perms: Vec<Vec<Vertex>>) -> Result<Self> {
        for (i, p) in perms.iter().enumerate() {
            let mut sorted = p.clone();
            sorted.sort_unstable();
            let part: Vec<Vertex> = ((i * n) as Vertex..((i + 1) * n) as Vertex).collect();
            if sorted != part {
                return Err(Error::param(format!(
                    "permutation {i} is not a bijection of part {i}"
                )));
            }
        }
        Ok(PermutationBundle { n, perms })
    }

    pub fn identity(r: usize, n: usize) -> Self {
        let perms = (0..r)
            .map(|i| ((i * n) as Vertex..((i + 1) * n) as Vertex).collect())
            .collect();
        PermutationBundle { n, perms }
    }

    pub fn random(r: usize, n: usize, seed: RandomSeed) -> Self {
        let mut rng = seed.rng();
        let mut bundle = PermutationBundle::identity(r, n);
        for p in &mut bundle.perms {
            p.shuffle(&mut rng);
        }
        bundle
    }

    /// Every bundle, `(n!)^r` of them.
    pub fn all(r: usize, n: usize) -> impl Iterator<Item = PermutationBundle> {
        (0..r)
            .map(|i| {
                ((i * n) as Vertex..((i + 1) * n) as Vertex)
                    .permutations(n)
                    .collect::<Vec<_>>()
            })
            .multi_cartesian_product()
            .map(move |perms| PermutationBundle { n, perms })
    }

    pub fn r(&self) -> usize {
        self.perms.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `π_part(v)`.
    pub fn apply(&self, part: usize, v: Vertex) -> Vertex {
        self.perms[part][v as usize - part * self.n]
    }
}

/// `B_π` together with what is needed to lift its factors.
#[derive(Clone, Debug)]
pub struct AuxiliaryGraph<'a> {
    pub family: &'a GraphFamily,
    pub bundle: PermutationBundle,
    pub graph: PartiteGraph,
}

pub fn build_b_pi<'a>(
    family: &'a GraphFamily,
    bundle: &PermutationBundle,
) -> Result<AuxiliaryGraph<'a>> {
    if (bundle.r(), bundle.n()) != (family.r(), family.n()) {
        return Err(Error::param(format!(
            "bundle has shape r = {}, n = {} but the family has r = {}, n = {}",
            bundle.r(),
            bundle.n(),
            family.r(),
            family.n()
        )));
    }
    let mut graph = PartiteGraph::empty(family.r(), family.n())?;
    for &(i, j, _) in family.blocks() {
        for s in graph.part_range(i) {
            let source =
                family.graph(family.governing_index(bundle, s, (j * family.n()) as Vertex));
            for t in source.neighbors_in(s, j) {
                graph.insert(s, t);
            }
        }
    }
    Ok(AuxiliaryGraph {
        family,
        bundle: bundle.clone(),
        graph,
    })
}

/// A factor of the union graph plus an edge → index assignment, sorted by
/// edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransversalFactor {
    pub factor: Factor,
    pub assignment: Vec<((Vertex, Vertex), usize)>,
}

/// Assigns every edge of every clique its governing index and verifies the
/// result against the family.
pub fn lift_factor(aux: &AuxiliaryGraph<'_>, factor: &Factor) -> Result<TransversalFactor> {
    let mut assignment: Vec<((Vertex, Vertex), usize)> = factor
        .cliques()
        .iter()
        .flat_map(|c| c.edges())
        .map(|(s, t)| ((s, t), aux.family.governing_index(&aux.bundle, s, t)))
        .collect();
    assignment.sort_unstable();
    let tf = TransversalFactor {
        factor: factor.clone(),
        assignment,
    };
    verify_transversal_factor(aux.family, &tf)
        .map_err(|v| Error::Internal(format!("lifted factor rejected: {v}")))?;
    Ok(tf)
}

/// Checks a transversal certificate: the cliques form a factor of the union
/// graph, the assignment covers exactly the clique edges, each edge lies in
/// its assigned graph, and every index `0..m` is used exactly once.
pub fn verify_transversal(
    family: &GraphFamily,
    cliques: &[Vec<Vertex>],
    assignment: &[((Vertex, Vertex), usize)],
) -> Result<(), Violation> {
    verify_factor(&family.union_graph(), cliques)?;
    let mut assigned: BTreeMap<(Vertex, Vertex), usize> = BTreeMap::new();
    for &((u, v), idx) in assignment {
        let key = (u.min(v), u.max(v));
        if assigned.insert(key, idx).is_some() {
            return Err(Violation::new(
                "assignment",
                format!("edge {u}-{v} assigned twice"),
            ));
        }
    }
    let mut uses = vec![0usize; family.len()];
    for clique in cliques {
        for (a, &u) in clique.iter().enumerate() {
            for &v in &clique[a + 1..] {
                let key = (u.min(v), u.max(v));
                let idx = *assigned.get(&key).ok_or_else(|| {
                    Violation::new(
                        "assignment",
                        format!("edge {}-{} has no index", key.0, key.1),
                    )
                })?;
                if idx >= family.len() {
                    return Err(Violation::new(
                        "index",
                        format!("index {idx} outside 0..{}", family.len()),
                    ));
                }
                if !family.graph(idx).has_edge(u, v) {
                    return Err(Violation::new(
                        "membership",
                        format!("edge {}-{} is not in graph {idx}", key.0, key.1),
                    ));
                }
                uses[idx] += 1;
                if uses[idx] > 1 {
                    return Err(Violation::new("index", format!("index {idx} used twice")));
                }
            }
        }
    }
    let clique_edges: usize = cliques
        .iter()
        .map(|c| c.len() * c.len().saturating_sub(1) / 2)
        .sum();
    if assigned.len() != clique_edges {
        return Err(Violation::new(
            "assignment",
            "assignment lists edges outside the factor",
        ));
    }
    if let Some(idx) = uses.iter().position(|&u| u == 0) {
        return Err(Violation::new("index", format!("index {idx} unused")));
    }
    Ok(())
}

pub fn verify_transversal_factor(
    family: &GraphFamily,
    tf: &TransversalFactor,
) -> Result<(), Violation> {
    let cliques: Vec<Vec<Vertex>> = tf
        .factor
        .cliques()
        .iter()
        .map(|c| c.vertices().to_vec())
        .collect();
    verify_transversal(family, &cliques, &tf.assignment)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BpiTrialReport {
    pub trials: usize,
    /// Bundles with `δ*(B_π) ≥ floor`.
    pub successes: usize,
    pub frequency: f64,
    /// `⌈(1 − 1/r + γ/2)n⌉`.
    pub floor: usize,
    pub min_observed: usize,
}

/// Samples `trials` bundles and reports how often `δ*(B_π)` reaches
/// `⌈(1 − 1/r + γ/2)n⌉`. Every member must satisfy
/// `δ* ≥ ⌈(1 − 1/r + γ)n⌉`.
pub fn bpi_min_degree_trial(
    family: &GraphFamily,
    gamma: f64,
    trials: usize,
    seed: RandomSeed,
) -> Result<BpiTrialReport> {
    if trials == 0 {
        return Err(Error::param("trials must be at least 1"));
    }
    let (r, n) = (family.r(), family.n());
    let hypothesis = degree_floor(r, n, gamma);
    let offending: Vec<usize> = (0..family.len())
        .filter(|&i| min_star_degree(family.graph(i)) < hypothesis)
        .collect();
    if !offending.is_empty() {
        return Err(Error::Infeasible(format!(
            "graphs {offending:?} have δ* below {hypothesis}"
        )));
    }
    let floor = degree_floor(r, n, gamma / 2.0);
    let mut successes = 0;
    let mut min_observed = usize::MAX;
    for t in 0..trials {
        let bundle = PermutationBundle::random(r, n, seed.derive(t as u64));
        let aux = build_b_pi(family, &bundle)?;
        let d = min_star_degree(&aux.graph);
        min_observed = min_observed.min(d);
        if d >= floor {
            successes += 1;
        }
    }
    Ok(BpiTrialReport {
        trials,
        successes,
        frequency: successes as f64 / trials as f64,
        floor,
        min_observed,
    })
}

/// `m = (N/r)·binom(r,2)` graphs on one unpartitioned vertex set of size `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonPartiteFamily {
    pub r: usize,
    pub vertex_count: usize,
    pub graphs: Vec<SimpleGraph>,
}

impl NonPartiteFamily {
    pub fn new(r: usize, vertex_count: usize, graphs: Vec<SimpleGraph>) -> Result<Self> {
        if r < 2 || !vertex_count.is_multiple_of(r) {
            return Err(Error::param(format!(
                "{vertex_count} vertices cannot be split into {r} classes"
            )));
        }
        let m = vertex_count / r * binom2(r);
        if graphs.len() != m {
            return Err(Error::param(format!(
                "non-partite family needs {m} graphs, got {}",
                graphs.len()
            )));
        }
        if graphs.iter().any(|g| g.vertex_count() != vertex_count) {
            return Err(Error::param("member graphs must share the vertex set"));
        }
        Ok(NonPartiteFamily {
            r,
            vertex_count,
            graphs,
        })
    }
}

#[derive(Clone, Debug)]
pub struct Reduction {
    /// Class `j` lists the original ids that became part `j`, in order, so
    /// original vertex `classes[j][k]` is partite vertex `j·(N/r) + k`.
    pub classes: Vec<Vec<Vertex>>,
    pub family: GraphFamily,
    /// Partitions drawn, including the accepted one.
    pub attempts: usize,
}

/// Draws random balanced partitions until every member, vertex and foreign
/// class satisfy `d(v, V_j) ≥ ⌈(1 − 1/r + γ/2)·N/r⌉`, then returns the
/// induced r-partite family. Each member must have minimum degree at least
/// `⌈(1 − 1/r + γ)N⌉`.
pub fn reduce_nonpartite(
    family: &NonPartiteFamily,
    gamma: f64,
    seed: RandomSeed,
    max_attempts: usize,
) -> Result<Reduction> {
    let (r, count) = (family.r, family.vertex_count);
    let size = count / r;
    let need = ((1.0 - 1.0 / r as f64 + gamma) * count as f64 - 1e-9).ceil() as usize;
    if let Some(i) = family.graphs.iter().position(|g| g.min_degree() < need) {
        return Err(Error::Infeasible(format!(
            "graph {i} has minimum degree below {need}"
        )));
    }
    let floor = degree_floor(r, size, gamma / 2.0);
    let mut worst = usize::MAX;
    for attempt in 1..=max_attempts {
        let classes = random_balanced_partition(count, r, seed.derive(attempt as u64))?;
        let mut class_of = vec![0usize; count];
        let mut masks = vec![vec![0u64; count.div_ceil(64)]; r];
        for (j, class) in classes.iter().enumerate() {
            for &v in class {
                class_of[v as usize] = j;
                masks[j][v as usize / 64] |= 1 << (v % 64);
            }
        }
        let mut low = usize::MAX;
        for g in &family.graphs {
            for v in 0..count as Vertex {
                let own = class_of[v as usize];
                for (j, mask) in masks.iter().enumerate() {
                    if j != own {
                        low = low.min(g.degree_into_mask(v, mask));
                    }
                }
            }
        }
        worst = worst.min(low);
        if low >= floor {
            let mut local = vec![0 as Vertex; count];
            for (j, class) in classes.iter().enumerate() {
                for (k, &v) in class.iter().enumerate() {
                    local[v as usize] = (j * size + k) as Vertex;
                }
            }
            let graphs = family
                .graphs
                .iter()
                .map(|g| {
                    let edges = g
                        .edges()
                        .filter(|&(u, v)| class_of[u as usize] != class_of[v as usize])
                        .map(|(u, v)| (local[u as usize], local[v as usize]));
                    PartiteGraph::new(r, size, edges)
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(Reduction {
                classes,
                family: GraphFamily::new(r, size, graphs)?,
                attempts: attempt,
            });
        }
    }
    Err(Error::Infeasible(format!(
        "no acceptable partition in {max_attempts} attempts; worst degree {worst} below floor {floor}"
    )))
}

/// Exact transversal factor search by exact cover, for `r = 3`, `n ≤ 4`.
///
/// Columns are the vertices and the graph indices; a row is a triangle of
/// the union graph together with distinct indices for its three edges, each
/// index's graph containing its edge.
pub fn transversal_oracle(family: &GraphFamily) -> Result<Option<TransversalFactor>> {
    if family.r() != 3 || family.n() > 4 {
        return Err(Error::GuardExceeded(format!(
            "transversal oracle handles r = 3, n ≤ 4 only (got r = {}, n = {})",
            family.r(),
            family.n()
        )));
    }
    let union = family.union_graph();
    let vertices = union.vertex_count();
    let mut ec = ExactCover::new(vertices + family.len());
    let mut rows = Vec::new();
    for clique in enumerate_kr(&union).members {
        let edges: Vec<(Vertex, Vertex)> = clique.edges().collect();
        let options: Vec<Vec<usize>> = edges
            .iter()
            .map(|&(u, v)| {
                (0..family.len())
                    .filter(|&i| family.graph(i).has_edge(u, v))
                    .collect()
            })
            .collect();
        for choice in options.iter().multi_cartesian_product() {
            if choice.iter().tuple_combinations().any(|(a, b)| a == b) {
                continue;
            }
            let mut cols: Vec<u32> = clique.vertices().to_vec();
            cols.extend(choice.iter().map(|&&i| (vertices + i) as u32));
            ec.add_row(&cols);
            rows.push((
                clique.clone(),
                edges
                    .iter()
                    .copied()
                    .zip(choice.into_iter().copied())
                    .collect::<Vec<_>>(),
            ));
        }
    }
    let Some(chosen) = ec.find_first(None).expect("no budget") else {
        return Ok(None);
    };
    let mut cliques = Vec::new();
    let mut assignment = Vec::new();
    for r in chosen {
        cliques.push(rows[r].0.clone());
        assignment.extend(rows[r].1.iter().copied());
    }
    assignment.sort_unstable();
    let tf = TransversalFactor {
        factor: Factor::new(&union, Tiling::new(cliques))?,
        assignment,
    };
    verify_transversal_factor(family, &tf)
        .map_err(|v| Error::Internal(format!("oracle solution rejected: {v}")))?;
    Ok(Some(tf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::find_factor;

    #[test]
    fn offsets_are_lexicographic() {
        let fam = GraphFamily::complete(4, 2).unwrap();
        let expected = [
            (0, 1, 0),
            (0, 2, 2),
            (0, 3, 4),
            (1, 2, 6),
            (1, 3, 8),
            (2, 3, 10),
        ];
        assert_eq!(fam.blocks(), &expected);
        for &(i, j, c) in &expected {
            assert_eq!(fam.offset(i, j), c);
        }
    }

    #[test]
    fn complete_family_gives_complete_b_pi() {
        let fam = GraphFamily::complete(3, 3).unwrap();
        for s in 0..5 {
            let aux =
                build_b_pi(&fam, &PermutationBundle::random(3, 3, RandomSeed::new(s))).unwrap();
            assert_eq!(aux.graph, PartiteGraph::complete(3, 3).unwrap());
        }
    }

    #[test]
    fn n1_identity_reads_each_block_graph() {
        // Graph 0 governs (0,1), graph 1 governs (0,2), graph 2 governs (1,2).
        let full = PartiteGraph::complete(3, 1).unwrap();
        let graphs = vec![
            full.clone(),
            full.filter_edges(|u, v| (u, v) != (0, 2)),
            full.filter_edges(|u, v| (u, v) != (0, 1)),
        ];
        let fam = GraphFamily::new(3, 1, graphs).unwrap();
        let aux = build_b_pi(&fam, &PermutationBundle::identity(3, 1)).unwrap();
        assert!(aux.graph.has_edge(0, 1));
        assert!(!aux.graph.has_edge(0, 2));
        assert!(aux.graph.has_edge(1, 2));
    }

    #[test]
    fn bundle_shape_mismatch_rejected() {
        let fam = GraphFamily::complete(3, 2).unwrap();
        assert!(build_b_pi(&fam, &PermutationBundle::identity(3, 3)).is_err());
        assert!(PermutationBundle::new(2, vec![vec![0, 0], vec![2, 3]]).is_err());
        assert!(PermutationBundle::new(2, vec![vec![1, 0], vec![3, 2]]).is_ok());
    }

    #[test]
    fn lift_on_single_triangle() {
        let fam = GraphFamily::complete(3, 1).unwrap();
        let aux = build_b_pi(&fam, &PermutationBundle::identity(3, 1)).unwrap();
        let f = find_factor(&aux.graph).unwrap();
        let tf = lift_factor(&aux, &f).unwrap();
        assert_eq!(tf.assignment, vec![((0, 1), 0), ((0, 2), 1), ((1, 2), 2)]);
    }

    #[test]
    fn verifier_reasons() {
        let fam = GraphFamily::complete(3, 1).unwrap();
        let tri = vec![vec![0, 1, 2]];
        assert!(verify_transversal(&fam, &tri, &[((0, 1), 0), ((0, 2), 1), ((1, 2), 2)]).is_ok());
        let dup =
            verify_transversal(&fam, &tri, &[((0, 1), 0), ((0, 2), 0), ((1, 2), 2)]).unwrap_err();
        assert_eq!(dup.reason, "index");
        assert!(dup.detail.contains("used twice"));
        let missing_graph = GraphFamily::new(
            3,
            1,
            vec![
                PartiteGraph::complete(3, 1).unwrap(),
                PartiteGraph::complete(3, 1).unwrap(),
                PartiteGraph::empty(3, 1).unwrap(),
            ],
        )
        .unwrap();
        let bad = verify_transversal(
            &missing_graph,
            &tri,
            &[((0, 1), 0), ((0, 2), 1), ((1, 2), 2)],
        )
        .unwrap_err();
        assert_eq!(bad.reason, "membership");
        assert_eq!(
            verify_transversal(&fam, &tri, &[((0, 1), 0), ((0, 2), 1)])
                .unwrap_err()
                .reason,
            "assignment"
        );
    }

    #[test]
    fn oracle_examples() {
        let fam = GraphFamily::complete(3, 2).unwrap();
        assert!(transversal_oracle(&fam).unwrap().is_some());
        let mut graphs = fam.graphs().to_vec();
        graphs[3] = PartiteGraph::empty(3, 2).unwrap();
        let holed = GraphFamily::new(3, 2, graphs).unwrap();
        assert!(transversal_oracle(&holed).unwrap().is_none());
        assert!(transversal_oracle(&GraphFamily::complete(3, 5).unwrap()).is_err());
    }

    #[test]
    fn all_bundles_count() {
        assert_eq!(PermutationBundle::all(3, 2).count(), 8);
        assert_eq!(PermutationBundle::all(3, 3).count(), 216);
    }

    #[test]
    fn complete_nonpartite_accepted_first_try() {
        let graphs = vec![SimpleGraph::complete(9); 9];
        let fam = NonPartiteFamily::new(3, 9, graphs).unwrap();
        let red = reduce_nonpartite(&fam, 0.2, RandomSeed::new(3), 5).unwrap();
        assert_eq!(red.attempts, 1);
        assert_eq!(red.family, GraphFamily::complete(3, 3).unwrap());
    }
}
