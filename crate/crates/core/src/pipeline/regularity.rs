use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::instance::PartitionedInstance;
use crate::error::{Error, Result};
use crate::graph::{PartiteGraph, Vertex};
use crate::rng::RandomSeed;

/// Largest side for which every subset pair is checked.
pub const EXHAUSTIVE_SIDE: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum Regularity {
    /// Every admissible subset pair was checked.
    Regular,
    /// No violation among the sampled subset pairs.
    RegularSampled { samples: usize },
    /// `|d(A, B) − d(X, Y)| ≥ ε` for the reported `A ⊆ X`, `B ⊆ Y`; the one
    /// with the largest deviation among those examined.
    Irregular {
        a: Vec<Vertex>,
        b: Vec<Vertex>,
        density: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub density: f64,
    pub regularity: Regularity,
}

impl RegularityReport {
    pub fn is_regular(&self) -> bool {
        !matches!(self.regularity, Regularity::Irregular { .. })
    }
}

pub fn pair_density(g: &PartiteGraph, x: &[Vertex], y: &[Vertex]) -> f64 {
    if x.is_empty() || y.is_empty() {
        return 0.0;
    }
    let e: usize = x.iter().map(|&v| g.degree_into_set(v, y)).sum();
    e as f64 / (x.len() * y.len()) as f64
}

/// Smallest admissible subset size `⌈ε|X|⌉`, at least 1.
fn min_size(eps: f64, len: usize) -> usize {
    ((eps * len as f64 - 1e-9).ceil() as usize).max(1)
}

/// Tests whether `(X, Y)` is ε-regular: `|d(A,B) − d(X,Y)| < ε` for all
/// `A ⊆ X`, `B ⊆ Y` with `|A| ≥ ε|X|`, `|B| ≥ ε|Y|`.
///
/// When both sides have at most [`EXHAUSTIVE_SIDE`] vertices the check is
/// exact: for each `A` the extreme densities over all `B` of a given size
/// come from the `|B|` vertices of `Y` with the most (or fewest) neighbours
/// in `A`. Otherwise `samples` random pairs are drawn, each vertex joining
/// with probability 1/2, redrawn until both meet the size bound.
pub fn check_regular_pair(
    g: &PartiteGraph,
    x: &[Vertex],
    y: &[Vertex],
    epsilon: f64,
    samples: usize,
    seed: RandomSeed,
) -> Result<RegularityReport> {
    if x.iter().any(|v| y.contains(v)) {
        return Err(Error::param("regular-pair sides overlap"));
    }
    if x.is_empty() || y.is_empty() {
        return Err(Error::param("regular-pair sides must be nonempty"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let density = pair_density(g, x, y);
    let regularity = if x.len() <= EXHAUSTIVE_SIDE && y.len() <= EXHAUSTIVE_SIDE {
        exhaustive(g, x, y, epsilon, density)
    } else {
        sampled(g, x, y, epsilon, density, samples, seed)
    };
    Ok(RegularityReport {
        density,
        regularity,
    })
}

fn exhaustive(g: &PartiteGraph, x: &[Vertex], y: &[Vertex], eps: f64, density: f64) -> Regularity {
    let (min_a, min_b) = (min_size(eps, x.len()), min_size(eps, y.len()));
    let mut worst: Option<(f64, Vec<Vertex>, Vec<Vertex>, f64)> = None;
    for mask in 1u32..(1 << x.len()) {
        let size_a = mask.count_ones() as usize;
        if size_a < min_a {
            continue;
        }
        let a: Vec<Vertex> = (0..x.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| x[i])
            .collect();
        let mut counts: Vec<(usize, usize)> = y
            .iter()
            .enumerate()
            .map(|(i, &v)| (g.degree_into_set(v, &a), i))
            .collect();
        // Descending by count, ties by position; the reverse order gives the
        // sparsest choices.
        counts.sort_by(|p, q| q.0.cmp(&p.0).then(p.1.cmp(&q.1)));
        for size_b in min_b..=y.len() {
            for dense in [true, false] {
                let chosen: Vec<&(usize, usize)> = if dense {
                    counts[..size_b].iter().collect()
                } else {
                    counts[counts.len() - size_b..].iter().collect()
                };
                let e: usize = chosen.iter().map(|c| c.0).sum();
                let d_ab = e as f64 / (size_a * size_b) as f64;
                let dev = (d_ab - density).abs();
                if dev >= eps && worst.as_ref().is_none_or(|w| dev > w.0) {
                    let mut b: Vec<Vertex> = chosen.iter().map(|c| y[c.1]).collect();
                    b.sort_unstable();
                    worst = Some((dev, a.clone(), b, d_ab));
                }
            }
        }
    }
    match worst {
        Some((_, a, b, density)) => Regularity::Irregular { a, b, density },
        None => Regularity::Regular,
    }
}

fn sampled(
    g: &PartiteGraph,
    x: &[Vertex],
    y: &[Vertex],
    eps: f64,
    density: f64,
    samples: usize,
    seed: RandomSeed,
) -> Regularity {
    let mut rng = seed.rng();
    let (min_a, min_b) = (min_size(eps, x.len()), min_size(eps, y.len()));
    let mut draw = |side: &[Vertex], min: usize| loop {
        let s: Vec<Vertex> = side.iter().copied().filter(|_| rng.gen::<bool>()).collect();
        if s.len() >= min {
            return s;
        }
    };
    let mut worst: Option<(f64, Vec<Vertex>, Vec<Vertex>, f64)> = None;
    for _ in 0..samples {
        let a = draw(x, min_a);
        let b = draw(y, min_b);
        let d_ab = pair_density(g, &a, &b);
        let dev = (d_ab - density).abs();
        if dev >= eps && worst.as_ref().is_none_or(|w| dev > w.0) {
            worst = Some((dev, a, b, d_ab));
        }
    }
    match worst {
        Some((_, a, b, density)) => Regularity::Irregular { a, b, density },
        None => Regularity::RegularSampled { samples },
    }
}

/// Shrinks an `(ε, d)`-regular tuple to a super-regular one.
///
/// A vertex of cluster `i` is dropped when its degree into some other
/// cluster `j` is below `(d − ε)|V_j|`. Each cluster then keeps
/// `⌈(1 − (r−1)ε)|V_i|⌉` of its remaining vertices, preferring the largest
/// minimum relative degree (ties to lower ids), and the result must have
/// every cross degree at least `(d − rε)` times the opposite kept size.
pub fn super_regularize(
    g: &PartiteGraph,
    tuple: &[Vec<Vertex>],
    epsilon: f64,
    d: f64,
) -> Result<Vec<Vec<Vertex>>> {
    let r = tuple.len();
    if r < 2 {
        return Err(Error::param("a tuple needs at least two clusters"));
    }
    if !(epsilon > 0.0) || (r - 1) as f64 * epsilon >= 1.0 {
        return Err(Error::param(format!(
            "(r - 1)·epsilon = {} must lie in (0, 1)",
            (r - 1) as f64 * epsilon
        )));
    }
    let mut kept = Vec::with_capacity(r);
    for (i, cluster) in tuple.iter().enumerate() {
        let keep = ((1.0 - (r - 1) as f64 * epsilon) * cluster.len() as f64 - 1e-9).ceil() as usize;
        let mut good: Vec<(f64, Vertex)> = Vec::new();
        for &v in cluster {
            let mut worst = f64::INFINITY;
            let mut ok = true;
            for (j, other) in tuple.iter().enumerate() {
                if j == i || other.is_empty() {
                    continue;
                }
                let deg = g.degree_into_set(v, other) as f64;
                ok &= deg >= (d - epsilon) * other.len() as f64;
                worst = worst.min(deg / other.len() as f64);
            }
            if ok {
                good.push((worst, v));
            }
        }
        if good.len() < keep {
            return Err(Error::Infeasible(format!(
                "cluster {i}: only {} of {} vertices have high degree, need {keep}",
                good.len(),
                cluster.len()
            )));
        }
        good.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut chosen: Vec<Vertex> = good[..keep].iter().map(|&(_, v)| v).collect();
        chosen.sort_unstable();
        kept.push(chosen);
    }
    let floor = d - r as f64 * epsilon;
    for (i, a) in kept.iter().enumerate() {
        for (j, b) in kept.iter().enumerate() {
            if i == j {
                continue;
            }
            for &v in a {
                let deg = g.degree_into_set(v, b);
                if (deg as f64) < floor * b.len() as f64 {
                    return Err(Error::Infeasible(format!(
                        "vertex {v} has {deg} neighbours in shrunk cluster {j}, below (d - r·epsilon)·{}",
                        b.len()
                    )));
                }
            }
        }
    }
    Ok(kept)
}

/// The reduced graph: vertex `i·k + j` stands for cluster `V_{ij}`, and two
/// clusters in different parts are adjacent iff their pair is ε-regular
/// with density at least `d`.
pub fn build_reduced_graph(
    inst: &PartitionedInstance,
    epsilon: f64,
    d: f64,
    samples: usize,
    seed: RandomSeed,
) -> Result<PartiteGraph> {
    let (r, k) = (inst.r(), inst.k());
    let mut reduced = PartiteGraph::empty(r, k)?;
    let mut label = 0u64;
    for a in 0..r {
        for b in a + 1..r {
            for ja in 0..k {
                for jb in 0..k {
                    let (x, y) = (&inst.clusters[a][ja], &inst.clusters[b][jb]);
                    label += 1;
                    if x.is_empty() || y.is_empty() {
                        continue;
                    }
                    let rep =
                        check_regular_pair(&inst.host, x, y, epsilon, samples, seed.derive(label))?;
                    if rep.is_regular() && rep.density >= d {
                        reduced.insert((a * k + ja) as Vertex, (b * k + jb) as Vertex);
                    }
                }
            }
        }
    }
    Ok(reduced)
}
