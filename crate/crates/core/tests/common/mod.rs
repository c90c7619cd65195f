//! Brute-force oracles that share no code with the library's search.

#![allow(dead_code)]

use krfactor::{PartiteGraph, Vertex};

/// Every one-vertex-per-part tuple whose pairs are all edges, in
/// lexicographic order.
pub fn brute_cliques(g: &PartiteGraph) -> Vec<Vec<Vertex>> {
    let (r, n) = (g.r(), g.n());
    let mut out = Vec::new();
    let total = n.pow(r as u32);
    for code in 0..total {
        let mut rest = code;
        let mut tuple = vec![0 as Vertex; r];
        for i in (0..r).rev() {
            tuple[i] = (i * n + rest % n) as Vertex;
            rest /= n;
        }
        let ok = (0..r).all(|a| (a + 1..r).all(|b| g.has_edge(tuple[a], tuple[b])));
        if ok {
            out.push(tuple);
        }
    }
    out
}

/// Number of factors, by covering the lowest uncovered vertex in every
/// possible way.
pub fn brute_count_factors(g: &PartiteGraph) -> u128 {
    let cliques = brute_cliques(g);
    let mut used = vec![false; g.vertex_count()];
    count_rec(&cliques, &mut used)
}

fn count_rec(cliques: &[Vec<Vertex>], used: &mut [bool]) -> u128 {
    let Some(v) = used.iter().position(|&u| !u) else {
        return 1;
    };
    let mut total = 0;
    for c in cliques.iter().filter(|c| c.contains(&(v as Vertex))) {
        if c.iter().any(|&u| used[u as usize]) {
            continue;
        }
        c.iter().for_each(|&u| used[u as usize] = true);
        total += count_rec(cliques, used);
        c.iter().for_each(|&u| used[u as usize] = false);
    }
    total
}

pub fn brute_has_factor(g: &PartiteGraph) -> bool {
    let cliques = brute_cliques(g);
    let mut used = vec![false; g.vertex_count()];
    exists_rec(&cliques, &mut used)
}

fn exists_rec(cliques: &[Vec<Vertex>], used: &mut [bool]) -> bool {
    let Some(v) = used.iter().position(|&u| !u) else {
        return true;
    };
    for c in cliques.iter().filter(|c| c.contains(&(v as Vertex))) {
        if c.iter().any(|&u| used[u as usize]) {
            continue;
        }
        c.iter().for_each(|&u| used[u as usize] = true);
        let found = exists_rec(cliques, used);
        c.iter().for_each(|&u| used[u as usize] = false);
        if found {
            return true;
        }
    }
    false
}

/// Largest number of disjoint cliques: each part-0 vertex is either left
/// out or covered by one of its cliques.
pub fn brute_max_tiling(g: &PartiteGraph) -> usize {
    let cliques = brute_cliques(g);
    let mut used = vec![false; g.vertex_count()];
    max_rec(&cliques, g.n(), 0, &mut used)
}

fn max_rec(cliques: &[Vec<Vertex>], n: usize, anchor: usize, used: &mut [bool]) -> usize {
    if anchor == n {
        return 0;
    }
    let mut best = max_rec(cliques, n, anchor + 1, used);
    for c in cliques.iter().filter(|c| c[0] as usize == anchor) {
        if c.iter().any(|&u| used[u as usize]) {
            continue;
        }
        c.iter().for_each(|&u| used[u as usize] = true);
        best = best.max(1 + max_rec(cliques, n, anchor + 1, used));
        c.iter().for_each(|&u| used[u as usize] = false);
    }
    best
}

/// The balanced r-partite graph on parts of size `n` whose cross pairs are
/// listed in lexicographic order and kept according to the bits of `mask`.
pub fn graph_from_mask(r: usize, n: usize, mask: u64) -> PartiteGraph {
    let total = r * n;
    let mut edges = Vec::new();
    let mut bit = 0;
    for u in 0..total {
        for v in u + 1..total {
            if u / n != v / n {
                if mask >> bit & 1 == 1 {
                    edges.push((u as Vertex, v as Vertex));
                }
                bit += 1;
            }
        }
    }
    PartiteGraph::new(r, n, edges).unwrap()
}

pub fn cross_pairs(r: usize, n: usize) -> usize {
    r * (r - 1) / 2 * n * n
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Standard deviation of a binomial frequency over `trials` draws.
pub fn freq_sigma(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}
