use std::fmt;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::embed::{cover_exceptional, CoverReport, LazyReveal};
use super::instance::PartitionedInstance;
use super::regularity::build_reduced_graph;
use super::weights::{balance_tuples, balance_weights, BalanceReport, WeightReport};
use crate::clique::Clique;
use crate::error::{Error, Result};
use crate::graph::{sparsify, split_rounds, PartiteGraph, Vertex};
use crate::rng::RandomSeed;
use crate::solver::{Factor, Solver, SolverConfig, Tiling};
use crate::verify::verify_factor;

/// Knobs of [`run_pipeline`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Candidate-set and quota parameter of the exceptional cover.
    pub mu: f64,
    /// Slack of the reserved-set size condition `(1/2 ± α)n/k`.
    pub alpha: f64,
    pub w_retries: usize,
    /// Also require the two degree conditions on `W`, which otherwise are
    /// only counted.
    pub strict_w: bool,
    /// Subset pairs per sampled regularity check.
    pub regular_samples: usize,
    pub solver: SolverConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mu: 0.05,
            alpha: 0.15,
            w_retries: 100,
            strict_w: false,
            regular_samples: 200,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    WSelection,
    ReducedGraph,
    Round1Cover,
    Round2Weights,
    Round2Tuples,
    Round3Factor,
    Verify,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::WSelection => "w_selection",
            Stage::ReducedGraph => "reduced_graph",
            Stage::Round1Cover => "round1_cover",
            Stage::Round2Weights => "round2_weights",
            Stage::Round2Tuples => "round2_tuples",
            Stage::Round3Factor => "round3_factor",
            Stage::Verify => "verify",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: Stage,
    pub message: String,
}

/// The reserved set `W` and how well it meets the three selection
/// conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WSelection {
    pub reserved: Vec<Vertex>,
    pub attempts: usize,
    /// `|W ∩ V_{ij}|` per cluster.
    pub sizes: Vec<Vec<usize>>,
    /// Pairs `(v, i)`, `v ∉ V_i`, with `d(v, W∩V_i) < (1 − 1/r + γ/4)|W∩V_i|`.
    pub degree_violations: usize,
    /// Pairs `(v, V_{ij})` with `d(v, V_{ij}) ≥ ε|V_{ij}|` whose share inside
    /// `W` leaves `[1/4, 3/4]`.
    pub split_violations: usize,
}

/// Draws `W` by keeping each vertex of `V ∖ B` with probability 1/2 until
/// every `|W ∩ V_{ij}|` lies in `(1/2 ± α)n/k` (and, when `strict`, the two
/// degree conditions hold with no violation).
pub fn select_w(
    inst: &PartitionedInstance,
    alpha: f64,
    retries: usize,
    strict: bool,
    seed: RandomSeed,
) -> Result<WSelection> {
    let host = &inst.host;
    let (r, k, n) = (host.r(), inst.k(), host.n());
    let lo = (0.5 - alpha) * n as f64 / k as f64;
    let hi = (0.5 + alpha) * n as f64 / k as f64;
    let mut rng = seed.rng();
    let mut exceptional = vec![false; host.vertex_count()];
    inst.exceptional
        .iter()
        .for_each(|&v| exceptional[v as usize] = true);
    for attempt in 1..=retries {
        let mut in_w = vec![false; host.vertex_count()];
        for v in 0..host.vertex_count() {
            if !exceptional[v] {
                in_w[v] = rng.gen::<bool>();
            }
        }
        let parts: Vec<Vec<Vec<Vertex>>> = inst
            .clusters
            .iter()
            .map(|part| {
                part.iter()
                    .map(|c| c.iter().copied().filter(|&v| in_w[v as usize]).collect())
                    .collect()
            })
            .collect();
        let sizes: Vec<Vec<usize>> = parts
            .iter()
            .map(|p| p.iter().map(Vec::len).collect())
            .collect();
        if sizes
            .iter()
            .flatten()
            .any(|&s| (s as f64) < lo - 1e-9 || s as f64 > hi + 1e-9)
        {
            continue;
        }
        let w_parts: Vec<Vec<Vertex>> = parts.iter().map(|p| p.concat()).collect();
        let mut degree_violations = 0;
        let mut split_violations = 0;
        let share = 1.0 - 1.0 / r as f64 + inst.params.gamma / 4.0;
        for v in 0..host.vertex_count() as Vertex {
            let own = host.part_of(v);
            for i in (0..r).filter(|&i| i != own) {
                if (host.degree_into_set(v, &w_parts[i]) as f64)
                    < share * w_parts[i].len() as f64 - 1e-9
                {
                    degree_violations += 1;
                }
                for j in 0..k {
                    let full = host.degree_into_set(v, &inst.clusters[i][j]) as f64;
                    if full > 0.0 && full >= inst.params.epsilon * inst.clusters[i][j].len() as f64
                    {
                        let inside = host.degree_into_set(v, &parts[i][j]) as f64;
                        if inside < 0.25 * full - 1e-9 || inside > 0.75 * full + 1e-9 {
                            split_violations += 1;
                        }
                    }
                }
            }
        }
        if strict && (degree_violations > 0 || split_violations > 0) {
            continue;
        }
        let reserved = (0..host.vertex_count() as Vertex)
            .filter(|&v| in_w[v as usize])
            .collect();
        return Ok(WSelection {
            reserved,
            attempts: attempt,
            sizes,
            degree_violations,
            split_violations,
        });
    }
    Err(Error::Infeasible(format!(
        "no admissible reserved set after {retries} attempts"
    )))
}

/// Stage-by-stage record of one pipeline run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub success: bool,
    pub failure: Option<StageFailure>,
    pub p: f64,
    pub p_prime: f64,
    pub seed: u64,
    pub w: Option<WSelection>,
    /// Reduced-graph factor: `tuples[t][i]` is the cluster of part `i` in
    /// tuple `t`.
    pub tuples: Vec<Vec<usize>>,
    pub round1: Option<CoverReport>,
    /// `⌊9n/10k⌋`.
    pub target: usize,
    pub weights: Option<WeightReport>,
    pub round2: Option<BalanceReport>,
    pub round3: Option<Tiling>,
    pub factor: Option<Factor>,
    pub warnings: Vec<String>,
}

impl PipelineReport {
    fn fail(mut self, stage: Stage, message: impl Into<String>) -> Self {
        self.success = false;
        self.failure = Some(StageFailure {
            stage,
            message: message.into(),
        });
        self
    }
}

/// Builds a factor of `G(p)` in three sparsification rounds at `p′` with
/// `1 − p = (1 − p′)³`, where `G` is `inst.host`.
///
/// The clusters play the role of the super-regular sets `V′_{ij}`. After
/// drawing `W`, the reduced graph's factor fixes the tuples. Round 1 covers
/// `B` with cliques inside `B ∪ W`; round 2 balances every cluster down to
/// `⌊9n/10k⌋` uncovered vertices using integer clique weights on the
/// reduced graph; round 3 solves each balanced tuple exactly. The union is
/// checked against both `G(p)` and the host.
///
/// Invalid input is an error; a failing stage is reported in the returned
/// report.
pub fn run_pipeline(
    inst: &PartitionedInstance,
    p: f64,
    seed: RandomSeed,
    config: &PipelineConfig,
) -> Result<PipelineReport> {
    inst.validate()?;
    let p_prime = split_rounds(p, 3)?;
    let host = &inst.host;
    let (r, k, n) = (host.r(), inst.k(), host.n());
    let target = 9 * n / (10 * k);
    let solver = Solver::new(config.solver);
    let mut report = PipelineReport {
        success: false,
        failure: None,
        p,
        p_prime,
        seed: seed.seed,
        w: None,
        tuples: Vec::new(),
        round1: None,
        target,
        weights: None,
        round2: None,
        round3: None,
        factor: None,
        warnings: Vec::new(),
    };

    let w = match select_w(
        inst,
        config.alpha,
        config.w_retries,
        config.strict_w,
        seed.derive(0),
    ) {
        Ok(w) => w,
        Err(e) => return Ok(report.fail(Stage::WSelection, e.to_string())),
    };
    if w.degree_violations > 0 || w.split_violations > 0 {
        report.warnings.push(format!(
            "reserved set: {} degree and {} split condition violations",
            w.degree_violations, w.split_violations
        ));
    }
    let mut in_w = vec![false; host.vertex_count()];
    w.reserved.iter().for_each(|&v| in_w[v as usize] = true);
    report.w = Some(w);

    let params = &inst.params;
    let reduced = build_reduced_graph(
        inst,
        params.epsilon,
        params.d,
        config.regular_samples,
        seed.derive(4),
    )?;
    let tuples: Vec<Vec<usize>> = match solver.find_factor(&reduced) {
        Ok(Some(f)) => f
            .cliques()
            .iter()
            .map(|c| {
                c.vertices()
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| v as usize - i * k)
                    .collect()
            })
            .collect(),
        Ok(None) => return Ok(report.fail(Stage::ReducedGraph, "reduced graph has no K_r-factor")),
        Err(e) => return Ok(report.fail(Stage::ReducedGraph, e.to_string())),
    };
    report.tuples = tuples.clone();

    let mut lazy = LazyReveal::new(host, p_prime, seed.derive(1));
    let mut cover_mask = in_w.clone();
    inst.exceptional
        .iter()
        .for_each(|&v| cover_mask[v as usize] = true);
    let cover_host = host.restrict(&cover_mask);
    let quotas: Vec<Vec<Vertex>> = inst.clusters.iter().flatten().cloned().collect();
    let mut roots = inst.exceptional.clone();
    roots.sort_unstable();
    let cover = match cover_exceptional(
        &cover_host,
        &mut lazy,
        &roots,
        config.mu,
        &quotas,
        seed.derive(5),
    ) {
        Ok(c) => c,
        Err(e) => return Ok(report.fail(Stage::Round1Cover, e.to_string())),
    };
    let g1 = lazy.finish();
    report.warnings.extend(cover.warnings.iter().cloned());
    let mut covered = vec![false; host.vertex_count()];
    cover
        .tiling
        .vertices()
        .for_each(|v| covered[v as usize] = true);
    let k1 = cover.tiling.clone();
    report.round1 = Some(cover);

    let residual: Vec<Vec<Vec<Vertex>>> = inst
        .clusters
        .iter()
        .map(|part| {
            part.iter()
                .map(|c| {
                    c.iter()
                        .copied()
                        .filter(|&v| !covered[v as usize])
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut lambda = Vec::with_capacity(r * k);
    for (i, part) in residual.iter().enumerate() {
        for (j, c) in part.iter().enumerate() {
            if c.len() < target {
                return Ok(report.fail(
                    Stage::Round2Weights,
                    format!("cluster V_{{{i},{j}}} has {} uncovered vertices, below the target {target}", c.len()),
                ));
            }
            lambda.push(c.len() - target);
        }
    }
    let weights = match balance_weights(&reduced, &lambda, params.gamma, &solver) {
        Ok(w) => w,
        Err(e) => return Ok(report.fail(Stage::Round2Weights, e.to_string())),
    };
    if !weights.hypotheses_hold() {
        report
            .warnings
            .push("weight balancing ran outside its spread or degree hypotheses".into());
    }
    let assignment = weights.assignment.clone();
    report.weights = Some(weights);

    let g2 = sparsify(host, p_prime, seed.derive(2))?;
    let balance = match balance_tuples(
        &g2,
        &residual,
        &in_w,
        &assignment,
        target,
        seed.derive(6),
        config.solver.node_budget,
    ) {
        Ok(b) => b,
        Err(e) => return Ok(report.fail(Stage::Round2Tuples, e.to_string())),
    };
    let mut removed = vec![false; host.vertex_count()];
    balance
        .tiling
        .vertices()
        .for_each(|v| removed[v as usize] = true);
    let k2 = balance.tiling.clone();
    report.round2 = Some(balance);

    let g3 = sparsify(host, p_prime, seed.derive(3))?;
    let mut k3 = Vec::new();
    for (t, tuple) in tuples.iter().enumerate() {
        let sets: Vec<Vec<Vertex>> = tuple
            .iter()
            .enumerate()
            .map(|(i, &j)| {
                residual[i][j]
                    .iter()
                    .copied()
                    .filter(|&v| !removed[v as usize])
                    .collect()
            })
            .collect();
        let (sub, back) = g3.induced(&sets)?;
        match solver.find_factor(&sub) {
            Ok(Some(f)) => {
                for c in f.cliques() {
                    k3.push(Clique::from_sorted(
                        c.vertices().iter().map(|&v| back[v as usize]).collect(),
                    ));
                }
            }
            Ok(None) => {
                return Ok(report.fail(
                    Stage::Round3Factor,
                    format!("tuple {t} {tuple:?} has no K_r-factor"),
                ))
            }
            Err(e) => {
                return Ok(report.fail(Stage::Round3Factor, format!("tuple {t} {tuple:?}: {e}")))
            }
        }
    }
    let k3 = Tiling::new(k3);
    report.round3 = Some(k3.clone());

    let mut all = k1;
    all.extend(k2);
    all.extend(k3);
    let gp = g1.union(&g2)?.union(&g3)?;
    let lists: Vec<Vec<Vertex>> = all.cliques.iter().map(|c| c.vertices().to_vec()).collect();
    if let Err(v) = verify_factor(&gp, &lists) {
        return Ok(report.fail(Stage::Verify, format!("not a factor of G(p): {v}")));
    }
    match Factor::new(host, all) {
        Ok(f) => report.factor = Some(f),
        Err(e) => return Ok(report.fail(Stage::Verify, e.to_string())),
    }
    report.success = true;
    Ok(report)
}

/// The sparsified graph `G(p)` a run with this seed works inside: the union
/// of its three rounds.
pub fn pipeline_graph(host: &PartiteGraph, p: f64, seed: RandomSeed) -> Result<PartiteGraph> {
    let p_prime = split_rounds(p, 3)?;
    let g1 = LazyReveal::new(host, p_prime, seed.derive(1)).finish();
    let g2 = sparsify(host, p_prime, seed.derive(2))?;
    let g3 = sparsify(host, p_prime, seed.derive(3))?;
    g1.union(&g2)?.union(&g3)
}
