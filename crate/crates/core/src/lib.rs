//! Exact `K_r`-factor search on balanced r-partite graphs, random
//! sparsification, clique-complex moment bounds, a staged factor-building
//! pipeline on partitioned instances, and transversal factors of graph
//! families via a permutation-built auxiliary graph.
//!
//! Sparsification acts on edges directly: `G(p)` keeps every edge
//! independently, and clique presence is whatever the sparsified edges
//! induce. No coupling with a random hypergraph is constructed.

pub mod bounds;
pub mod clique;
pub mod error;
pub mod exact_cover;
pub mod generate;
pub mod graph;
pub mod io;
pub mod pipeline;
pub mod rng;
pub mod solver;
pub mod transversal;
pub mod verify;

pub use clique::{Clique, CliqueFamily};
pub use error::{Error, Result};
pub use graph::{PartiteGraph, SimpleGraph, Vertex};
pub use rng::RandomSeed;
pub use solver::{Factor, Solver, SolverConfig, Tiling};
