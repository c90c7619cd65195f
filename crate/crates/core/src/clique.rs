//! Transversal `K_r` copies: the hyperedges of the r-clique complex.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ones_in_range, PartiteGraph, Vertex};

/// A copy of `K_r` with exactly one vertex per part, stored as its sorted
/// vertex tuple. Because parts are contiguous id ranges, the sorted tuple
/// lists the vertex of part 0 first, then part 1, and so on.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Clique(Vec<Vertex>);

impl Clique {
    /// Validates one-vertex-per-part and pairwise adjacency in `g`.
    pub fn new(g: &PartiteGraph, mut vertices: Vec<Vertex>) -> Result<Self> {
        vertices.sort_unstable();
        if vertices.len() != g.r() {
            return Err(Error::param(format!(
                "clique must have {} vertices, got {}",
                g.r(),
                vertices.len()
            )));
        }
        for (part, &v) in vertices.iter().enumerate() {
            if !g.contains(v) {
                return Err(Error::VertexOutOfRange {
                    vertex: v,
                    count: g.vertex_count(),
                });
            }
            if g.part_of(v) != part {
                return Err(Error::param(format!(
                    "clique {vertices:?} is not one vertex per part"
                )));
            }
        }
        for (a, b) in pairs(&vertices) {
            if !g.has_edge(a, b) {
                return Err(Error::param(format!("{a} and {b} are not adjacent")));
            }
        }
        Ok(Clique(vertices))
    }

    /// Caller guarantees the vertices are sorted, one per part and pairwise
    /// adjacent in the relevant host.
    pub(crate) fn from_sorted(vertices: Vec<Vertex>) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Clique(vertices)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// Vertex in the given part (by position in the sorted tuple).
    pub fn in_part(&self, part: usize) -> Vertex {
        self.0[part]
    }

    /// The `binom(r, 2)` edges `(a, b)` with `a < b`, lexicographic.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        pairs(&self.0)
    }

    pub fn is_disjoint(&self, other: &Clique) -> bool {
        !self.0.iter().any(|&v| other.contains(v))
    }

    pub fn shared_vertices(&self, other: &Clique) -> usize {
        self.0.iter().filter(|&&v| other.contains(v)).count()
    }
}

fn pairs(vs: &[Vertex]) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
    vs.iter()
        .enumerate()
        .flat_map(move |(i, &a)| vs[i + 1..].iter().map(move |&b| (a, b)))
}

/// A duplicate-free list of cliques of one host, in lexicographic order when
/// produced by enumeration.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueFamily {
    pub r: usize,
    pub members: Vec<Clique>,
}

impl CliqueFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Clique> {
        self.members.iter()
    }
}

/// Calls `visit` on every transversal clique whose vertices all lie in the
/// bitset `allowed`, in lexicographic order.
pub(crate) fn walk_cliques(g: &PartiteGraph, allowed: &[u64], visit: &mut dyn FnMut(&[Vertex])) {
    if g.n() == 0 {
        return;
    }
    let words = g.words();
    let mut levels = vec![0u64; words * (g.r() + 1)];
    levels[..words].copy_from_slice(allowed);
    let mut stack = Vec::with_capacity(g.r());
    walk(g, 0, &mut levels, &mut stack, visit);
}

// levels[d] holds the vertices adjacent to every vertex chosen above depth d.
fn walk(
    g: &PartiteGraph,
    part: usize,
    levels: &mut [u64],
    stack: &mut Vec<Vertex>,
    visit: &mut dyn FnMut(&[Vertex]),
) {
    if part == g.r() {
        visit(stack);
        return;
    }
    let (words, n) = (g.words(), g.n());
    let members: Vec<usize> = ones_in_range(
        &levels[part * words..(part + 1) * words],
        part * n,
        (part + 1) * n,
    )
    .collect();
    for v in members {
        {
            let (head, tail) = levels.split_at_mut((part + 1) * words);
            let cur = &head[part * words..];
            for ((dst, &a), &b) in tail[..words].iter_mut().zip(cur).zip(g.row(v as Vertex)) {
                *dst = a & b;
            }
        }
        stack.push(v as Vertex);
        walk(g, part + 1, levels, stack, visit);
        stack.pop();
    }
}

fn full_mask(g: &PartiteGraph) -> Vec<u64> {
    let mut mask = vec![0u64; g.words()];
    for v in 0..g.vertex_count() {
        mask[v / 64] |= 1 << (v % 64);
    }
    mask
}

fn mask_of(g: &PartiteGraph, vertices: impl IntoIterator<Item = Vertex>) -> Vec<u64> {
    let mut mask = vec![0u64; g.words()];
    for v in vertices {
        mask[v as usize / 64] |= 1 << (v % 64);
    }
    mask
}

/// All transversal `K_r` copies of `g`, lexicographically ordered.
pub fn enumerate_kr(g: &PartiteGraph) -> CliqueFamily {
    let mut members = Vec::new();
    walk_cliques(g, &full_mask(g), &mut |vs| {
        members.push(Clique::from_sorted(vs.to_vec()))
    });
    CliqueFamily { r: g.r(), members }
}

/// `K_r(G, v)`: the copies containing `v`.
pub fn rooted_cliques(g: &PartiteGraph, v: Vertex) -> Result<CliqueFamily> {
    if !g.contains(v) {
        return Err(Error::VertexOutOfRange {
            vertex: v,
            count: g.vertex_count(),
        });
    }
    let own = g.part_of(v);
    let mut mask = full_mask(g);
    for u in g.part_range(own) {
        if u != v {
            mask[u as usize / 64] &= !(1 << (u % 64));
        }
    }
    let mut members = Vec::new();
    walk_cliques(g, &mask, &mut |vs| {
        members.push(Clique::from_sorted(vs.to_vec()))
    });
    Ok(CliqueFamily { r: g.r(), members })
}

/// Cliques of `G[X_1, …, X_r]` where `sets[i] ⊆ V_i`. Sets may have different
/// sizes.
pub fn cliques_within(g: &PartiteGraph, sets: &[Vec<Vertex>]) -> Result<CliqueFamily> {
    let mask = subset_mask(g, sets)?;
    let mut members = Vec::new();
    walk_cliques(g, &mask, &mut |vs| {
        members.push(Clique::from_sorted(vs.to_vec()))
    });
    Ok(CliqueFamily { r: g.r(), members })
}

/// Exact number of transversal cliques inside `G[X_1, …, X_r]`.
pub fn count_kr_induced(g: &PartiteGraph, sets: &[Vec<Vertex>]) -> Result<u64> {
    let mask = subset_mask(g, sets)?;
    let mut count = 0u64;
    walk_cliques(g, &mask, &mut |_| count += 1);
    Ok(count)
}

fn subset_mask(g: &PartiteGraph, sets: &[Vec<Vertex>]) -> Result<Vec<u64>> {
    if sets.len() != g.r() {
        return Err(Error::param(format!(
            "expected {} subsets, got {}",
            g.r(),
            sets.len()
        )));
    }
    for (part, set) in sets.iter().enumerate() {
        for &v in set {
            if !g.contains(v) {
                return Err(Error::VertexOutOfRange {
                    vertex: v,
                    count: g.vertex_count(),
                });
            }
            if g.part_of(v) != part {
                return Err(Error::param(format!(
                    "vertex {v} of subset {part} lies in part {}",
                    g.part_of(v)
                )));
            }
        }
    }
    Ok(mask_of(g, sets.iter().flatten().copied()))
}
