//! Monte Carlo sweeps over a `(n, C)` or `(n, p)` grid.
//!
//! Trial `t` at part size `n` uses the seed `seed.derive(n).derive(t)` at
//! every grid value. The host (or family) and the per-edge uniforms are then
//! shared across the grid, so a trial that succeeds at `p` also succeeds at
//! every larger `p` and the success rate is monotone along the grid.

use std::time::Instant;

use krfactor::generate::gen_min_degree_instance;
use krfactor::graph::sparsify;
use krfactor::solver::Solver;
use krfactor::transversal::{
    build_b_pi, lift_factor, verify_transversal_factor, GraphFamily, PermutationBundle,
};
use krfactor::verify::verify_factor;
use krfactor::{Error, Factor, RandomSeed, Result, Vertex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Mode, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failure,
    /// The solver hit its budget.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub mode: Mode,
    pub r: usize,
    pub n: usize,
    pub gamma: f64,
    pub c: Option<f64>,
    pub p: f64,
    pub trials: usize,
    pub successes: usize,
    /// Trials the solver gave up on; a row with any is marked skipped.
    pub skipped: usize,
    pub success_rate: f64,
    pub seed: u64,
    /// Zero unless timing was requested.
    pub wall_ms: u64,
}

impl SweepRow {
    pub fn is_skipped(&self) -> bool {
        self.skipped > 0
    }

    /// Binomial standard error of the success rate.
    pub fn sigma(&self) -> f64 {
        let q = self.success_rate;
        (q * (1.0 - q) / self.trials as f64).sqrt()
    }
}

pub fn trial_seed(seed: u64, n: usize, trial: usize) -> RandomSeed {
    RandomSeed::new(seed).derive(n as u64).derive(trial as u64)
}

fn lists(f: &Factor) -> Vec<Vec<Vertex>> {
    f.cliques().iter().map(|c| c.vertices().to_vec()).collect()
}

fn decide(
    found: Result<Option<Factor>>,
    check: impl FnOnce(&Factor) -> Result<()>,
) -> Result<Outcome> {
    match found {
        Ok(Some(f)) => check(&f).map(|_| Outcome::Success),
        Ok(None) => Ok(Outcome::Failure),
        Err(Error::GuardExceeded(_)) => Ok(Outcome::Skipped),
        Err(e) => Err(e),
    }
}

/// One trial: sparsify a minimum-degree host at `p` and search for a factor.
pub fn threshold_trial(
    cfg: &ExperimentConfig,
    n: usize,
    p: f64,
    seed: RandomSeed,
) -> Result<Outcome> {
    let host = gen_min_degree_instance(cfg.r, n, cfg.gamma, cfg.edge_keep, seed.derive(0))?;
    let g = sparsify(&host, p, seed.derive(1))?;
    decide(Solver::new(cfg.solver).find_factor(&g), |f| {
        verify_factor(&g, &lists(f))
            .map_err(|v| Error::Internal(format!("solver factor rejected: {v}")))
    })
}

/// The family of `n·binom(r,2)` minimum-degree graphs used by transversal
/// trials.
pub fn trial_family(cfg: &ExperimentConfig, n: usize, seed: RandomSeed) -> Result<GraphFamily> {
    let m = n * cfg.r * (cfg.r - 1) / 2;
    let graphs = (0..m)
        .map(|i| gen_min_degree_instance(cfg.r, n, cfg.gamma, cfg.edge_keep, seed.derive(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    GraphFamily::new(cfg.r, n, graphs)
}

/// One trial: build `B_π` for a random bundle, sparsify it at `p`, and lift
/// a factor to a transversal factor verified against the family.
pub fn transversal_trial(
    cfg: &ExperimentConfig,
    n: usize,
    p: f64,
    seed: RandomSeed,
) -> Result<Outcome> {
    let family = trial_family(cfg, n, seed.derive(0))?;
    let aux = build_b_pi(
        &family,
        &PermutationBundle::random(cfg.r, n, seed.derive(1)),
    )?;
    let g = sparsify(&aux.graph, p, seed.derive(2))?;
    decide(Solver::new(cfg.solver).find_factor(&g), |f| {
        let tf = lift_factor(&aux, f)?;
        verify_transversal_factor(&family, &tf)
            .map_err(|v| Error::Internal(format!("lifted factor rejected: {v}")))
    })
}

fn run_point(cfg: &ExperimentConfig, point: Point, timing: bool) -> Result<SweepRow> {
    let start = Instant::now();
    let outcomes = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(cfg.seed, point.n, t);
            match cfg.mode {
                Mode::Threshold => threshold_trial(cfg, point.n, point.p, seed),
                Mode::Transversal => transversal_trial(cfg, point.n, point.p, seed),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let successes = outcomes.iter().filter(|&&o| o == Outcome::Success).count();
    let skipped = outcomes.iter().filter(|&&o| o == Outcome::Skipped).count();
    Ok(SweepRow {
        mode: cfg.mode,
        r: cfg.r,
        n: point.n,
        gamma: cfg.gamma,
        c: point.c,
        p: point.p,
        trials: cfg.trials,
        successes,
        skipped,
        success_rate: successes as f64 / cfg.trials as f64,
        seed: cfg.seed,
        wall_ms: if timing {
            start.elapsed().as_millis() as u64
        } else {
            0
        },
    })
}

/// Runs every grid point in order; trials within a point run in parallel.
pub fn run_sweep(cfg: &ExperimentConfig, timing: bool) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    cfg.points()?
        .into_iter()
        .map(|pt| run_point(cfg, pt, timing))
        .collect()
}
