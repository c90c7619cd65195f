//! Seeded instance generators.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::{degree_floor, PartiteGraph, SimpleGraph, Vertex};
use crate::rng::RandomSeed;

/// A balanced r-partite graph with `δ*(G) ≥ ⌈(1 − 1/r + γ)n⌉`.
///
/// Starts from `K_{n,…,n}` and, for every part pair independently, visits the
/// cross edges in a seeded random order, deleting an edge unless that would
/// push either endpoint's degree into the other part below the floor. Stops
/// once the pair's kept fraction reaches `edge_keep` or the order is
/// exhausted.
pub fn gen_min_degree_instance(
    r: usize,
    n: usize,
    gamma: f64,
    edge_keep: f64,
    seed: RandomSeed,
) -> Result<PartiteGraph> {
    if !(0.0..=1.0).contains(&edge_keep) {
        return Err(Error::param(format!(
            "edge_keep {edge_keep} outside [0, 1]"
        )));
    }
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::Infeasible(format!(
            "gamma {gamma} is not a nonnegative number"
        )));
    }
    let floor = degree_floor(r, n, gamma);
    if floor > n {
        return Err(Error::Infeasible(format!(
            "degree floor {floor} exceeds part size {n} (gamma {gamma} too large for r = {r})"
        )));
    }
    let mut g = PartiteGraph::complete(r, n)?;
    let target_removals = ((1.0 - edge_keep) * (n * n) as f64).round() as usize;
    let mut pair_index = 0u64;
    for i in 0..r {
        for j in i + 1..r {
            let mut rng = seed.derive(pair_index).rng();
            pair_index += 1;
            let mut order: Vec<(Vertex, Vertex)> = g
                .part_range(i)
                .flat_map(|a| g.part_range(j).map(move |b| (a, b)))
                .collect();
            order.shuffle(&mut rng);
            let mut deg_a = vec![n; n];
            let mut deg_b = vec![n; n];
            let (base_a, base_b) = (i * n, j * n);
            let mut removed = 0;
            for (a, b) in order {
                if removed == target_removals {
                    break;
                }
                let (la, lb) = (a as usize - base_a, b as usize - base_b);
                if deg_a[la] > floor && deg_b[lb] > floor {
                    g.remove(a, b);
                    deg_a[la] -= 1;
                    deg_b[lb] -= 1;
                    removed += 1;
                }
            }
        }
    }
    Ok(g)
}

/// A dense graph with no `K_r`-factor: complete multipartite except that one
/// seeded vertex `v` loses every edge into one other part, so `v` lies in no
/// `K_r`.
pub fn gen_no_factor_witness(r: usize, n: usize, seed: RandomSeed) -> Result<NoFactorWitness> {
    if r < 3 || n < 1 {
        return Err(Error::param(format!(
            "witness needs r >= 3 and n >= 1, got r = {r}, n = {n}"
        )));
    }
    let mut rng = seed.rng();
    let vertex = rng.gen_range(0..(r * n) as u64) as Vertex;
    let own = vertex as usize / n;
    let mut other = rng.gen_range(0..(r - 1) as u64) as usize;
    if other >= own {
        other += 1;
    }
    let full = PartiteGraph::complete(r, n)?;
    let graph = full.filter_edges(|a, b| {
        let (x, y) = if a == vertex { (a, b) } else { (b, a) };
        !(x == vertex && y as usize / n == other)
    });
    Ok(NoFactorWitness {
        graph,
        vertex,
        isolated_from: other,
    })
}

#[derive(Clone, Debug)]
pub struct NoFactorWitness {
    pub graph: PartiteGraph,
    /// The vertex contained in no `K_r`.
    pub vertex: Vertex,
    /// The part it has no neighbours in.
    pub isolated_from: usize,
}

/// Uniformly random equipartition of `0..vertex_count` into `r` classes,
/// each returned sorted.
pub fn random_balanced_partition(
    vertex_count: usize,
    r: usize,
    seed: RandomSeed,
) -> Result<Vec<Vec<Vertex>>> {
    if r == 0 || !vertex_count.is_multiple_of(r) {
        return Err(Error::param(format!(
            "{vertex_count} vertices cannot be split into {r} equal classes"
        )));
    }
    let mut ids: Vec<Vertex> = (0..vertex_count as Vertex).collect();
    ids.shuffle(&mut seed.rng());
    let size = vertex_count / r;
    Ok(ids
        .chunks(size.max(1))
        .take(r)
        .map(|c| {
            let mut c = c.to_vec();
            c.sort_unstable();
            c
        })
        .chain(std::iter::repeat_with(Vec::new))
        .take(r)
        .collect())
}

/// A graph on `vertex_count` vertices with minimum degree at least
/// `⌈min_fraction · vertex_count⌉`, built like [`gen_min_degree_instance`]
/// from the complete graph. Used for non-partite family members.
pub fn gen_dense_graph(
    vertex_count: usize,
    min_fraction: f64,
    edge_keep: f64,
    seed: RandomSeed,
) -> Result<SimpleGraph> {
    if !(0.0..=1.0).contains(&edge_keep) {
        return Err(Error::param(format!(
            "edge_keep {edge_keep} outside [0, 1]"
        )));
    }
    let floor = (min_fraction * vertex_count as f64 - 1e-9).ceil().max(0.0) as usize;
    if vertex_count > 0 && floor > vertex_count - 1 {
        return Err(Error::Infeasible(format!(
            "minimum degree {floor} impossible on {vertex_count} vertices"
        )));
    }
    let mut g = SimpleGraph::complete(vertex_count);
    let mut order: Vec<(Vertex, Vertex)> = g.edges().collect();
    let target_removals = ((1.0 - edge_keep) * order.len() as f64).round() as usize;
    order.shuffle(&mut seed.rng());
    let mut deg = vec![vertex_count.saturating_sub(1); vertex_count];
    let mut removed = 0;
    for (a, b) in order {
        if removed == target_removals {
            break;
        }
        if deg[a as usize] > floor && deg[b as usize] > floor {
            g.remove(a, b);
            deg[a as usize] -= 1;
            deg[b as usize] -= 1;
            removed += 1;
        }
    }
    Ok(g)
}
