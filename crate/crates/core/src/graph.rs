//! Balanced r-partite graphs and the operations that act on them directly:
//! minimum star degree, random sparsification and the threshold formula.
//!
//! Vertices are global 0-based ids. Part `i` owns the contiguous range
//! `i*n .. (i+1)*n`, so part lookup is a division.

use std::fmt;
use std::ops::Range;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSeed;

pub type Vertex = u32;

/// Square bit matrix used as adjacency storage.
#[derive(Clone, PartialEq, Eq)]
pub(crate) struct BitMatrix {
    size: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub(crate) fn new(size: usize) -> Self {
        let words = size.div_ceil(64);
        BitMatrix {
            size,
            words,
            bits: vec![0; words * size],
        }
    }

    #[inline]
    pub(crate) fn get(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    #[inline]
    fn set(&mut self, u: usize, v: usize) {
        self.bits[u * self.words + v / 64] |= 1 << (v % 64);
    }

    #[inline]
    fn clear(&mut self, u: usize, v: usize) {
        self.bits[u * self.words + v / 64] &= !(1 << (v % 64));
    }

    #[inline]
    pub(crate) fn row(&self, u: usize) -> &[u64] {
        &self.bits[u * self.words..(u + 1) * self.words]
    }

    pub(crate) fn words(&self) -> usize {
        self.words
    }
}

/// Number of set bits of `row` with index in `lo..hi`.
pub(crate) fn count_in_range(row: &[u64], lo: usize, hi: usize) -> usize {
    if lo >= hi {
        return 0;
    }
    let (first, last) = (lo / 64, (hi - 1) / 64);
    let mut total = 0;
    for w in first..=last {
        let mut word = row[w];
        if w == first {
            word &= !0u64 << (lo % 64);
        }
        if w == last && !hi.is_multiple_of(64) {
            word &= (1u64 << (hi % 64)) - 1;
        }
        total += word.count_ones() as usize;
    }
    total
}

/// Indices of set bits of `row` within `lo..hi`, ascending.
pub(crate) fn ones_in_range(row: &[u64], lo: usize, hi: usize) -> impl Iterator<Item = usize> + '_ {
    let (first, last) = if lo >= hi {
        (1, 0)
    } else {
        (lo / 64, (hi - 1) / 64)
    };
    (first..=last).flat_map(move |w| {
        let mut word = row[w];
        if w == first {
            word &= !0u64 << (lo % 64);
        }
        if w == last && !hi.is_multiple_of(64) {
            word &= (1u64 << (hi % 64)) - 1;
        }
        std::iter::from_fn(move || {
            if word == 0 {
                return None;
            }
            let bit = word.trailing_zeros() as usize;
            word &= word - 1;
            Some(w * 64 + bit)
        })
    })
}

/// A balanced r-partite graph: `r` parts of `n` vertices each, with edges only
/// between distinct parts. Immutable once built.
///
/// Serializes as `{"r", "n", "edges"}` with edges in lexicographic order;
/// deserialization validates like [`PartiteGraph::new`].
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct PartiteGraph {
    r: usize,
    n: usize,
    adj: BitMatrix,
    edges: usize,
}

/// Largest graph accepted from serialized input (adjacency is quadratic).
pub const SERDE_MAX_VERTICES: usize = 1 << 15;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphRepr {
    r: usize,
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
}

impl TryFrom<GraphRepr> for PartiteGraph {
    type Error = Error;

    fn try_from(repr: GraphRepr) -> Result<Self> {
        if repr.r.saturating_mul(repr.n) > SERDE_MAX_VERTICES {
            return Err(Error::param(format!(
                "serialized graph has more than {SERDE_MAX_VERTICES} vertices"
            )));
        }
        PartiteGraph::new(repr.r, repr.n, repr.edges)
    }
}

impl From<PartiteGraph> for GraphRepr {
    fn from(g: PartiteGraph) -> Self {
        GraphRepr {
            r: g.r,
            n: g.n,
            edges: g.edges().collect(),
        }
    }
}

impl fmt::Debug for PartiteGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PartiteGraph")
            .field("r", &self.r)
            .field("n", &self.n)
            .field("edges", &self.edges)
            .finish()
    }
}

impl PartiteGraph {
    /// Builds a graph from an edge list, rejecting intra-part and out-of-range
    /// pairs. Duplicate pairs collapse.
    pub fn new(
        r: usize,
        n: usize,
        edges: impl IntoIterator<Item = (Vertex, Vertex)>,
    ) -> Result<Self> {
        let mut g = PartiteGraph::empty(r, n)?;
        for (u, v) in edges {
            g.check_pair(u, v)?;
            g.insert(u, v);
        }
        Ok(g)
    }

    pub fn empty(r: usize, n: usize) -> Result<Self> {
        if r < 2 {
            return Err(Error::param(format!(
                "part count must be at least 2, got {r}"
            )));
        }
        let count = r
            .checked_mul(n)
            .filter(|&c| c <= Vertex::MAX as usize)
            .ok_or_else(|| Error::param("vertex count overflows"))?;
        Ok(PartiteGraph {
            r,
            n,
            adj: BitMatrix::new(count),
            edges: 0,
        })
    }

    /// Complete balanced r-partite graph `K_{n,...,n}`.
    pub fn complete(r: usize, n: usize) -> Result<Self> {
        let mut g = PartiteGraph::empty(r, n)?;
        let count = g.vertex_count();
        for u in 0..count {
            for v in u + 1..count {
                if u / n != v / n {
                    g.insert(u as Vertex, v as Vertex);
                }
            }
        }
        Ok(g)
    }

    fn check_pair(&self, u: Vertex, v: Vertex) -> Result<()> {
        let count = self.vertex_count();
        for w in [u, v] {
            if w as usize >= count {
                return Err(Error::VertexOutOfRange { vertex: w, count });
            }
        }
        if self.part_of(u) == self.part_of(v) {
            return Err(Error::IntraPartEdge {
                u,
                v,
                part: self.part_of(u),
            });
        }
        Ok(())
    }

    pub(crate) fn insert(&mut self, u: Vertex, v: Vertex) {
        let (u, v) = (u as usize, v as usize);
        if !self.adj.get(u, v) {
            self.adj.set(u, v);
            self.adj.set(v, u);
            self.edges += 1;
        }
    }

    pub(crate) fn remove(&mut self, u: Vertex, v: Vertex) {
        let (u, v) = (u as usize, v as usize);
        if self.adj.get(u, v) {
            self.adj.clear(u, v);
            self.adj.clear(v, u);
            self.edges -= 1;
        }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Part size.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertex_count(&self) -> usize {
        self.r * self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn contains(&self, v: Vertex) -> bool {
        (v as usize) < self.vertex_count()
    }

    #[inline]
    pub fn part_of(&self, v: Vertex) -> usize {
        v as usize / self.n
    }

    pub fn part_range(&self, part: usize) -> Range<Vertex> {
        (part * self.n) as Vertex..((part + 1) * self.n) as Vertex
    }

    #[inline]
    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.contains(u) && self.contains(v) && self.adj.get(u as usize, v as usize)
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj
            .row(v as usize)
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    /// `d(v, V_part)`.
    pub fn degree_into(&self, v: Vertex, part: usize) -> usize {
        count_in_range(self.adj.row(v as usize), part * self.n, (part + 1) * self.n)
    }

    /// Number of neighbours of `v` inside `set`.
    pub fn degree_into_set(&self, v: Vertex, set: &[Vertex]) -> usize {
        set.iter().filter(|&&u| self.has_edge(v, u)).count()
    }

    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        ones_in_range(self.adj.row(v as usize), 0, self.vertex_count()).map(|u| u as Vertex)
    }

    pub fn neighbors_in(&self, v: Vertex, part: usize) -> impl Iterator<Item = Vertex> + '_ {
        ones_in_range(self.adj.row(v as usize), part * self.n, (part + 1) * self.n)
            .map(|u| u as Vertex)
    }

    pub(crate) fn row(&self, v: Vertex) -> &[u64] {
        self.adj.row(v as usize)
    }

    pub(crate) fn words(&self) -> usize {
        self.adj.words()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        let count = self.vertex_count();
        (0..count).flat_map(move |u| {
            ones_in_range(self.adj.row(u), u + 1, count).map(move |v| (u as Vertex, v as Vertex))
        })
    }

    /// Same vertex set, keeping only the edges for which `keep` holds.
    pub fn filter_edges(&self, mut keep: impl FnMut(Vertex, Vertex) -> bool) -> PartiteGraph {
        let mut out = PartiteGraph::empty(self.r, self.n).expect("shape already validated");
        for (u, v) in self.edges() {
            if keep(u, v) {
                out.insert(u, v);
            }
        }
        out
    }

    /// Same vertex set, dropping every edge with an endpoint outside `keep`.
    pub fn restrict(&self, keep: &[bool]) -> PartiteGraph {
        self.filter_edges(|u, v| keep[u as usize] && keep[v as usize])
    }

    /// Edge-wise union of two graphs on the same parts.
    pub fn union(&self, other: &PartiteGraph) -> Result<PartiteGraph> {
        if (self.r, self.n) != (other.r, other.n) {
            return Err(Error::param(
                "union of graphs with different part structure",
            ));
        }
        let mut out = self.clone();
        for (u, v) in other.edges() {
            out.insert(u, v);
        }
        Ok(out)
    }

    /// Balanced subgraph induced by one equal-size vertex set per part.
    ///
    /// Returns the relabelled graph and the map from its local ids back to
    /// ids of `self`.
    pub fn induced(&self, sets: &[Vec<Vertex>]) -> Result<(PartiteGraph, Vec<Vertex>)> {
        if sets.len() != self.r {
            return Err(Error::param(format!(
                "expected {} vertex sets, got {}",
                self.r,
                sets.len()
            )));
        }
        let size = sets[0].len();
        let mut back = Vec::with_capacity(size * self.r);
        for (part, set) in sets.iter().enumerate() {
            if set.len() != size {
                return Err(Error::param("induced vertex sets must have equal sizes"));
            }
            for &v in set {
                if !self.contains(v) {
                    return Err(Error::VertexOutOfRange {
                        vertex: v,
                        count: self.vertex_count(),
                    });
                }
                if self.part_of(v) != part {
                    return Err(Error::param(format!("vertex {v} is not in part {part}")));
                }
            }
            back.extend_from_slice(set);
        }
        let mut sub = PartiteGraph::empty(self.r, size)?;
        for a in 0..back.len() {
            for b in a + 1..back.len() {
                if a / size != b / size && self.has_edge(back[a], back[b]) {
                    sub.insert(a as Vertex, b as Vertex);
                }
            }
        }
        Ok((sub, back))
    }
}

/// A simple undirected graph without part structure, used for the members of
/// non-partite graph families.
#[derive(Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    adj: BitMatrix,
    edges: usize,
}

impl fmt::Debug for SimpleGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SimpleGraph")
            .field("vertices", &self.adj.size)
            .field("edges", &self.edges)
            .finish()
    }
}

impl SimpleGraph {
    pub fn new(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (Vertex, Vertex)>,
    ) -> Result<Self> {
        let mut g = SimpleGraph::empty(vertex_count);
        for (u, v) in edges {
            for w in [u, v] {
                if w as usize >= vertex_count {
                    return Err(Error::VertexOutOfRange {
                        vertex: w,
                        count: vertex_count,
                    });
                }
            }
            if u == v {
                return Err(Error::param(format!("self-loop at {u}")));
            }
            g.insert(u, v);
        }
        Ok(g)
    }

    pub fn empty(vertex_count: usize) -> Self {
        SimpleGraph {
            adj: BitMatrix::new(vertex_count),
            edges: 0,
        }
    }

    pub fn complete(vertex_count: usize) -> Self {
        let mut g = SimpleGraph::empty(vertex_count);
        for u in 0..vertex_count as Vertex {
            for v in u + 1..vertex_count as Vertex {
                g.insert(u, v);
            }
        }
        g
    }

    pub(crate) fn insert(&mut self, u: Vertex, v: Vertex) {
        let (u, v) = (u as usize, v as usize);
        if !self.adj.get(u, v) {
            self.adj.set(u, v);
            self.adj.set(v, u);
            self.edges += 1;
        }
    }

    pub(crate) fn remove(&mut self, u: Vertex, v: Vertex) {
        let (u, v) = (u as usize, v as usize);
        if self.adj.get(u, v) {
            self.adj.clear(u, v);
            self.adj.clear(v, u);
            self.edges -= 1;
        }
    }

    /// Neighbours of `v` inside the vertex set given as a bit mask with
    /// `vertex_count.div_ceil(64)` words.
    pub(crate) fn degree_into_mask(&self, v: Vertex, mask: &[u64]) -> usize {
        self.adj
            .row(v as usize)
            .iter()
            .zip(mask)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.size
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        let count = self.vertex_count();
        (u as usize) < count && (v as usize) < count && self.adj.get(u as usize, v as usize)
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj
            .row(v as usize)
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    pub fn min_degree(&self) -> usize {
        (0..self.vertex_count() as Vertex)
            .map(|v| self.degree(v))
            .min()
            .unwrap_or(0)
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        let count = self.vertex_count();
        (0..count).flat_map(move |u| {
            ones_in_range(self.adj.row(u), u + 1, count).map(move |v| (u as Vertex, v as Vertex))
        })
    }
}

/// `δ*(G)`: the minimum over ordered part pairs `(i, j)` and `v ∈ V_i` of
/// `d(v, V_j)`. Zero for an empty graph.
pub fn min_star_degree(g: &PartiteGraph) -> usize {
    let mut best = usize::MAX;
    for v in 0..g.vertex_count() as Vertex {
        let own = g.part_of(v);
        for part in (0..g.r()).filter(|&p| p != own) {
            best = best.min(g.degree_into(v, part));
        }
    }
    if best == usize::MAX {
        0
    } else {
        best
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::param(format!("probability {p} outside [0, 1]")))
    }
}

/// `G(p)`: keeps every edge independently with probability `p`.
///
/// Edges are visited in lexicographic order and each consumes one uniform
/// draw, so the result is a deterministic function of `(G, p, seed)` and
/// `sparsify(G, p₁, s) ⊆ sparsify(G, p₂, s)` whenever `p₁ ≤ p₂`.
pub fn sparsify(g: &PartiteGraph, p: f64, seed: RandomSeed) -> Result<PartiteGraph> {
    check_probability(p)?;
    let mut rng = seed.rng();
    Ok(g.filter_edges(|_, _| rng.gen::<f64>() < p))
}

/// The per-round probability `p′` with `(1 − p′)^rounds = 1 − p`.
pub fn split_rounds(p: f64, rounds: u32) -> Result<f64> {
    check_probability(p)?;
    if rounds < 1 {
        return Err(Error::param("rounds must be at least 1"));
    }
    if rounds == 1 {
        return Ok(p);
    }
    // ln_1p / exp_m1 keep precision for small p.
    let per_round = -(((-p).ln_1p() / rounds as f64).exp_m1());
    Ok(per_round.clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParams {
    pub c: f64,
    pub r: usize,
    pub n: usize,
    pub gamma: f64,
}

impl ThresholdParams {
    pub fn new(c: f64, r: usize, n: usize, gamma: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::param(format!(
                "C must be a finite nonnegative number, got {c}"
            )));
        }
        if r < 3 {
            return Err(Error::param(format!("r must be at least 3, got {r}")));
        }
        if n < 2 {
            return Err(Error::param(format!("n must be at least 2, got {n}")));
        }
        if !(gamma > 0.0 && gamma <= 1.0 / r as f64 + 1e-12) {
            return Err(Error::param(format!(
                "gamma must lie in (0, 1/r], got {gamma}"
            )));
        }
        Ok(ThresholdParams { c, r, n, gamma })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    /// Probability actually used, in `[0, 1]`.
    pub p: f64,
    /// Unclamped formula value.
    pub raw: f64,
    pub clamped: bool,
}

/// `p = min(1, C · n^{−2/r} · (ln n)^{1/binom(r,2)})`.
pub fn threshold_p(params: &ThresholdParams) -> Threshold {
    let n = params.n as f64;
    let r = params.r as f64;
    let pairs = binom2(params.r) as f64;
    let raw = params.c * n.powf(-2.0 / r) * n.ln().powf(1.0 / pairs);
    Threshold {
        p: raw.min(1.0),
        raw,
        clamped: raw > 1.0,
    }
}

/// `binom(r, 2)`.
pub fn binom2(r: usize) -> usize {
    r * r.saturating_sub(1) / 2
}

/// `⌈(1 − 1/r + γ)·n⌉`, the degree floor of the minimum-degree hypothesis.
/// A tolerance absorbs rounding so that `γ = 1/r` yields exactly `n`.
pub fn degree_floor(r: usize, n: usize, gamma: f64) -> usize {
    let x = (1.0 - 1.0 / r as f64 + gamma) * n as f64;
    (x - 1e-9).ceil().max(0.0) as usize
}
