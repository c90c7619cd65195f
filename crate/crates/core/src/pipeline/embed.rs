use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::clique::{rooted_cliques, Clique};
use crate::error::{Error, Result};
use crate::graph::{PartiteGraph, Vertex};
use crate::rng::RandomSeed;
use crate::solver::Tiling;

/// Source of edge presence in the current sparsification round.
pub trait EdgeReveal {
    fn present(&mut self, u: Vertex, v: Vertex) -> bool;
}

/// Presence read from a fixed graph.
pub struct FixedReveal<'a>(pub &'a PartiteGraph);

impl EdgeReveal for FixedReveal<'_> {
    fn present(&mut self, u: Vertex, v: Vertex) -> bool {
        self.0.has_edge(u, v)
    }
}

/// Reveals edges of `base` lazily. Each edge owns the uniform that
/// [`crate::graph::sparsify`] would draw for it under the same seed, so the
/// answers do not depend on query order and [`LazyReveal::finish`] equals
/// `sparsify(base, p, seed)`.
pub struct LazyReveal<'a> {
    base: &'a PartiteGraph,
    p: f64,
    draws: HashMap<(Vertex, Vertex), f64>,
    seen: HashSet<(Vertex, Vertex)>,
}

impl<'a> LazyReveal<'a> {
    pub fn new(base: &'a PartiteGraph, p: f64, seed: RandomSeed) -> Self {
        let mut rng = seed.rng();
        let draws = base.edges().map(|e| (e, rng.gen::<f64>())).collect();
        LazyReveal {
            base,
            p,
            draws,
            seen: HashSet::new(),
        }
    }

    /// Number of distinct host edges inspected so far.
    pub fn revealed(&self) -> usize {
        self.seen.len()
    }

    /// The full sparsified graph, including edges never inspected.
    pub fn finish(self) -> PartiteGraph {
        self.base.filter_edges(|u, v| self.draws[&(u, v)] < self.p)
    }
}

impl EdgeReveal for LazyReveal<'_> {
    fn present(&mut self, u: Vertex, v: Vertex) -> bool {
        let key = (u.min(v), u.max(v));
        match self.draws.get(&key) {
            Some(&x) => {
                self.seen.insert(key);
                x < self.p
            }
            None => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotaUsage {
    pub set: usize,
    pub size: usize,
    pub used: usize,
    /// `4rμ|X_s| + r − 2`.
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    pub tiling: Tiling,
    /// `(root, its clique)` in processing order.
    pub assignments: Vec<(Vertex, Clique)>,
    pub quotas: Vec<QuotaUsage>,
    pub warnings: Vec<String>,
}

/// Covers each root by a clique of `host` present under `reveal`, processing
/// roots in order.
///
/// For root `v_i` a candidate list `E′` of up to `μ·N^{r−1}` rooted cliques
/// is drawn by a seeded shuffle (`N = host.vertex_count()`); cliques that
/// touch earlier chosen cliques, later roots, or a saturated quota set are
/// discarded, and the first remaining clique present under `reveal` is
/// taken. A set `X_s` is saturated once `⌊4rμ|X_s|⌋` of its vertices are
/// used, which keeps every final count within `4rμ|X_s| + r − 2`.
/// Asymptotic hypotheses that fail at this scale produce warnings.
pub fn cover_exceptional(
    host: &PartiteGraph,
    reveal: &mut dyn EdgeReveal,
    roots: &[Vertex],
    mu: f64,
    quotas: &[Vec<Vertex>],
    seed: RandomSeed,
) -> Result<CoverReport> {
    if !(mu > 0.0) {
        return Err(Error::param(format!("mu must be positive, got {mu}")));
    }
    let count = host.vertex_count();
    let r = host.r();
    let mut set_of: Vec<Option<usize>> = vec![None; count];
    let mut is_root = vec![false; count];
    for &v in roots {
        if v as usize >= count {
            return Err(Error::VertexOutOfRange { vertex: v, count });
        }
        if std::mem::replace(&mut is_root[v as usize], true) {
            return Err(Error::param(format!("root {v} listed twice")));
        }
    }
    for (s, set) in quotas.iter().enumerate() {
        for &v in set {
            if v as usize >= count {
                return Err(Error::VertexOutOfRange { vertex: v, count });
            }
            if is_root[v as usize] {
                return Err(Error::param(format!("quota set {s} contains root {v}")));
            }
            if set_of[v as usize].replace(s).is_some() {
                return Err(Error::param(format!("quota sets overlap at vertex {v}")));
            }
        }
    }
    let mut warnings = Vec::new();
    let n = count as f64;
    if roots.len() as f64 > mu * mu * n {
        warnings.push(format!(
            "{} roots exceed mu^2·n = {:.2}",
            roots.len(),
            mu * mu * n
        ));
    }
    let cap_real = mu * n.powi(r as i32 - 1);
    let saturation: Vec<usize> = quotas
        .iter()
        .map(|x| (4.0 * r as f64 * mu * x.len() as f64 + 1e-9).floor() as usize)
        .collect();
    let mut used_in_set = vec![0usize; quotas.len()];
    let mut used = vec![false; count];
    let mut later_root = is_root.clone();
    let mut rng = seed.rng();
    let mut assignments = Vec::with_capacity(roots.len());
    for &root in roots {
        later_root[root as usize] = false;
        let mut family = rooted_cliques(host, root)?.members;
        if (family.len() as f64) < cap_real {
            warnings.push(format!(
                "root {root}: {} rooted cliques, fewer than mu·n^(r-1) = {cap_real:.1}; candidate set clamped",
                family.len()
            ));
        }
        family.shuffle(&mut rng);
        family.truncate((cap_real.ceil() as usize).min(family.len()).max(1));
        let blocked = |c: &Clique| {
            c.vertices().iter().any(|&u| {
                let u = u as usize;
                used[u]
                    || later_root[u]
                    || set_of[u].is_some_and(|s| used_in_set[s] >= saturation[s])
            })
        };
        let candidates: Vec<&Clique> = family.iter().filter(|c| !blocked(c)).collect();
        let picked = candidates
            .iter()
            .find(|c| c.edges().all(|(a, b)| reveal.present(a, b)))
            .map(|c| (*c).clone());
        let Some(clique) = picked else {
            return Err(Error::Infeasible(format!(
                "root {root}: none of {} candidate cliques is present",
                candidates.len()
            )));
        };
        for &u in clique.vertices() {
            used[u as usize] = true;
            if let Some(s) = set_of[u as usize] {
                used_in_set[s] += 1;
            }
        }
        assignments.push((root, clique));
    }
    let quotas_report: Vec<QuotaUsage> = quotas
        .iter()
        .enumerate()
        .map(|(s, x)| QuotaUsage {
            set: s,
            size: x.len(),
            used: used_in_set[s],
            bound: 4.0 * r as f64 * mu * x.len() as f64 + r as f64 - 2.0,
        })
        .collect();
    for q in &quotas_report {
        if q.used as f64 > q.bound + 1e-9 {
            return Err(Error::Internal(format!(
                "quota set {} uses {} vertices, above {}",
                q.set, q.used, q.bound
            )));
        }
    }
    for (root, clique) in &assignments {
        if !clique.contains(*root) {
            return Err(Error::Internal(format!("clique for root {root} misses it")));
        }
    }
    Ok(CoverReport {
        tiling: Tiling::new(assignments.iter().map(|(_, c)| c.clone()).collect()),
        assignments,
        quotas: quotas_report,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_roots_no_cliques() {
        let g = PartiteGraph::complete(3, 3).unwrap();
        let rep = cover_exceptional(&g, &mut FixedReveal(&g), &[], 0.05, &[], RandomSeed::new(0))
            .unwrap();
        assert_eq!(rep.tiling.size(), 0);
    }

    #[test]
    fn single_root_in_complete_graph() {
        let g = PartiteGraph::complete(3, 5).unwrap();
        let rep = cover_exceptional(
            &g,
            &mut FixedReveal(&g),
            &[7],
            0.05,
            &[],
            RandomSeed::new(1),
        )
        .unwrap();
        assert_eq!(rep.tiling.size(), 1);
        assert!(rep.tiling.cliques[0].contains(7));
    }

    #[test]
    fn missing_clique_fails_naming_root() {
        let g = PartiteGraph::complete(3, 2)
            .unwrap()
            .filter_edges(|u, v| u != 0 && v != 0);
        let err = cover_exceptional(
            &g,
            &mut FixedReveal(&g),
            &[0],
            0.05,
            &[],
            RandomSeed::new(0),
        )
        .unwrap_err();
        assert!(err.to_string().contains("root 0"));
    }

    #[test]
    fn lazy_reveal_memoizes_and_finishes() {
        let g = PartiteGraph::complete(3, 4).unwrap();
        let mut lazy = LazyReveal::new(&g, 0.5, RandomSeed::new(9));
        let first = lazy.present(0, 5);
        assert_eq!(lazy.present(5, 0), first);
        assert!(!lazy.present(0, 1));
        assert_eq!(lazy.revealed(), 1);
        let full = lazy.finish();
        assert_eq!(full.has_edge(0, 5), first);
        assert!(full.edges().all(|(u, v)| g.has_edge(u, v)));
    }

    #[test]
    fn input_validation() {
        let g = PartiteGraph::complete(3, 3).unwrap();
        let seed = RandomSeed::new(0);
        assert!(cover_exceptional(&g, &mut FixedReveal(&g), &[0, 0], 0.1, &[], seed).is_err());
        assert!(cover_exceptional(&g, &mut FixedReveal(&g), &[0], 0.1, &[vec![0]], seed).is_err());
        assert!(cover_exceptional(
            &g,
            &mut FixedReveal(&g),
            &[0],
            0.1,
            &[vec![3], vec![3]],
            seed
        )
        .is_err());
        assert!(cover_exceptional(&g, &mut FixedReveal(&g), &[0], 0.0, &[], seed).is_err());
    }
}
