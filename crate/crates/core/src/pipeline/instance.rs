use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{PartiteGraph, Vertex};
use crate::rng::RandomSeed;

/// Constants of the regularity setting: `ε`, the density threshold `d` of
/// the reduced graph, the degree surplus `γ`, and the number `k` of clusters
/// per part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityParams {
    pub epsilon: f64,
    pub d: f64,
    pub gamma: f64,
    pub k: usize,
}

impl RegularityParams {
    /// Enforces `0 < ε < d < 1`, `0 < γ ≤ 1` and `k ≥ 1`.
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < self.d && self.d < 1.0) {
            return Err(Error::param(format!(
                "need 0 < epsilon < d < 1, got epsilon = {}, d = {}",
                self.epsilon, self.d
            )));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::param(format!(
                "gamma must lie in (0, 1], got {}",
                self.gamma
            )));
        }
        if self.k == 0 {
            return Err(Error::param("k must be at least 1"));
        }
        Ok(())
    }
}

/// A host graph with clusters `V_{ij}` (`clusters[i][j] ⊆ V_i`), the
/// exceptional set `B` of unclustered vertices and an optional reserved set
/// `W`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionedInstance {
    pub host: PartiteGraph,
    pub clusters: Vec<Vec<Vec<Vertex>>>,
    pub exceptional: Vec<Vertex>,
    #[serde(default)]
    pub reserved: Option<Vec<Vertex>>,
    pub params: RegularityParams,
}

impl PartitionedInstance {
    pub fn r(&self) -> usize {
        self.host.r()
    }

    pub fn k(&self) -> usize {
        self.params.k
    }

    /// Checks the structural invariants: `r` lists of `k` sorted clusters,
    /// each inside its part, pairwise disjoint; `B` is exactly the
    /// unclustered vertices; `W` avoids `B`.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let (r, k) = (self.host.r(), self.params.k);
        if self.clusters.len() != r || self.clusters.iter().any(|c| c.len() != k) {
            return Err(Error::param(format!(
                "expected {r} parts with {k} clusters each"
            )));
        }
        let count = self.host.vertex_count();
        let mut owner = vec![false; count];
        for (i, part) in self.clusters.iter().enumerate() {
            for (j, cluster) in part.iter().enumerate() {
                if cluster.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::param(format!(
                        "cluster ({i}, {j}) is not strictly sorted"
                    )));
                }
                for &v in cluster {
                    if v as usize >= count || self.host.part_of(v) != i {
                        return Err(Error::param(format!(
                            "vertex {v} of cluster ({i}, {j}) is not in part {i}"
                        )));
                    }
                    if std::mem::replace(&mut owner[v as usize], true) {
                        return Err(Error::param(format!("vertex {v} lies in two clusters")));
                    }
                }
            }
        }
        let leftover: Vec<Vertex> = (0..count as Vertex)
            .filter(|&v| !owner[v as usize])
            .collect();
        let mut b = self.exceptional.clone();
        b.sort_unstable();
        if b != leftover {
            return Err(Error::param(
                "exceptional set must be exactly the unclustered vertices",
            ));
        }
        if let Some(w) = &self.reserved {
            if let Some(&v) = w
                .iter()
                .find(|&&v| v as usize >= count || !owner[v as usize])
            {
                return Err(Error::param(format!(
                    "reserved vertex {v} is exceptional or out of range"
                )));
            }
        }
        Ok(())
    }
}

/// Generator parameters of [`gen_super_regular_instance`] beyond the shape arguments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantedConfig {
    /// Degree surplus used for exceptional vertices.
    pub gamma: f64,
    pub epsilon: f64,
    /// Reduced-graph density threshold as a fraction of the edge
    /// probability.
    pub reduced_density_factor: f64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            gamma: 0.2,
            epsilon: 0.15,
            reduced_density_factor: 0.5,
        }
    }
}

/// Density of the pair `(V_{a,t}, V_{b,t})` of tuple `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDensity {
    pub tuple: usize,
    pub parts: (usize, usize),
    pub density: f64,
}

/// A planted instance: part `i` holds `k` clusters of `cluster_size`
/// vertices followed by `b_size / r` exceptional vertices. Every cross-part
/// pair between clustered vertices is an edge with probability `d`; pairs
/// touching an exceptional vertex use `max(d, 1 − 1/r + γ)`. Tuple `t` is
/// `(V_{0t}, …, V_{r−1,t})`.
///
/// Pairs are drawn in lexicographic order, one uniform draw each.
pub fn gen_super_regular_instance(
    r: usize,
    k: usize,
    cluster_size: usize,
    d: f64,
    b_size: usize,
    seed: RandomSeed,
    config: &PlantedConfig,
) -> Result<(PartitionedInstance, Vec<PairDensity>)> {
    if r < 2 || k == 0 || cluster_size == 0 {
        return Err(Error::param("need r >= 2, k >= 1 and cluster_size >= 1"));
    }
    if !(d > 0.0 && d <= 1.0) {
        return Err(Error::param(format!("d must lie in (0, 1], got {d}")));
    }
    if !b_size.is_multiple_of(r) {
        return Err(Error::param(format!(
            "b_size {b_size} must be divisible by r = {r}"
        )));
    }
    if 10 * b_size > r * k * cluster_size {
        return Err(Error::param(
            "b_size exceeds a tenth of the clustered vertices",
        ));
    }
    let per_part_b = b_size / r;
    let n = k * cluster_size + per_part_b;
    let b_prob = d.max(1.0 - 1.0 / r as f64 + config.gamma).min(1.0);
    let is_b = |v: usize| v % n >= k * cluster_size;
    let mut host = PartiteGraph::empty(r, n)?;
    let mut rng = seed.rng();
    let total = r * n;
    for u in 0..total {
        for v in u + 1..total {
            if u / n == v / n {
                continue;
            }
            let prob = if is_b(u) || is_b(v) { b_prob } else { d };
            if rng.gen::<f64>() < prob {
                host.insert(u as Vertex, v as Vertex);
            }
        }
    }
    let clusters: Vec<Vec<Vec<Vertex>>> = (0..r)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let start = i * n + j * cluster_size;
                    (start as Vertex..(start + cluster_size) as Vertex).collect()
                })
                .collect()
        })
        .collect();
    let exceptional: Vec<Vertex> = (0..total)
        .filter(|&v| is_b(v))
        .map(|v| v as Vertex)
        .collect();
    let mut densities = Vec::new();
    for t in 0..k {
        for a in 0..r {
            for b in a + 1..r {
                let e: usize = clusters[a][t]
                    .iter()
                    .map(|&x| host.degree_into_set(x, &clusters[b][t]))
                    .sum();
                densities.push(PairDensity {
                    tuple: t,
                    parts: (a, b),
                    density: e as f64 / (cluster_size * cluster_size) as f64,
                });
            }
        }
    }
    let params = RegularityParams {
        epsilon: config.epsilon,
        d: config.reduced_density_factor * d,
        gamma: config.gamma,
        k,
    };
    let inst = PartitionedInstance {
        host,
        clusters,
        exceptional,
        reserved: None,
        params,
    };
    inst.validate()?;
    Ok((inst, densities))
}
