//! Certificate checking that shares no code with the solver: cliques are
//! plain vertex lists and every property is checked from the adjacency
//! relation directly.

use std::fmt;

use crate::graph::{PartiteGraph, Vertex};

/// The first problem found in a certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Short machine-readable category, e.g. `coverage`.
    pub reason: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.reason, self.detail)
    }
}

impl Violation {
    pub(crate) fn new(reason: &'static str, detail: impl Into<String>) -> Self {
        Violation {
            reason,
            detail: detail.into(),
        }
    }
}

/// Checks that `cliques` is a tiling of `g`: each entry is `r` in-range
/// vertices, one per part, pairwise adjacent, and no vertex is used twice.
pub fn verify_tiling(g: &PartiteGraph, cliques: &[Vec<Vertex>]) -> Result<(), Violation> {
    let r = g.r();
    let total = g.vertex_count();
    let mut owner: Vec<Option<usize>> = vec![None; total];
    for (idx, clique) in cliques.iter().enumerate() {
        if clique.len() != r {
            return Err(Violation::new(
                "size",
                format!("clique {idx} has {} vertices, expected {r}", clique.len()),
            ));
        }
        let mut parts_seen = vec![false; r];
        for &v in clique {
            if (v as usize) >= total {
                return Err(Violation::new(
                    "range",
                    format!("vertex {v} of clique {idx} does not exist"),
                ));
            }
            let part = v as usize / g.n();
            if parts_seen[part] {
                return Err(Violation::new(
                    "part",
                    format!("clique {idx} has two vertices in part {part}"),
                ));
            }
            parts_seen[part] = true;
        }
        for a in 0..r {
            for b in a + 1..r {
                if !g.has_edge(clique[a], clique[b]) {
                    return Err(Violation::new(
                        "adjacency",
                        format!(
                            "clique {idx}: {} and {} are not adjacent",
                            clique[a], clique[b]
                        ),
                    ));
                }
            }
        }
        for &v in clique {
            if let Some(prev) = owner[v as usize] {
                return Err(Violation::new(
                    "disjointness",
                    format!("vertex {v} lies in cliques {prev} and {idx}"),
                ));
            }
            owner[v as usize] = Some(idx);
        }
    }
    Ok(())
}

/// [`verify_tiling`] plus coverage of every vertex.
pub fn verify_factor(g: &PartiteGraph, cliques: &[Vec<Vertex>]) -> Result<(), Violation> {
    verify_tiling(g, cliques)?;
    let mut covered = vec![false; g.vertex_count()];
    for &v in cliques.iter().flatten() {
        covered[v as usize] = true;
    }
    match covered.iter().position(|&c| !c) {
        Some(v) => Err(Violation::new(
            "coverage",
            format!("vertex {v} is not covered"),
        )),
        None => Ok(()),
    }
}
