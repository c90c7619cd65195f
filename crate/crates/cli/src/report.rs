//! Janson reports, pipeline runs, and certificate verification.

use krfactor::bounds::{janson_lambda_delta, janson_lower_bound, surviving_count, TailBoundInput};
use krfactor::clique::{count_kr_induced, enumerate_kr};
use krfactor::graph::sparsify;
use krfactor::io::TransversalCertificate;
use krfactor::pipeline::{run_pipeline, PartitionedInstance, PipelineConfig, PipelineReport};
use krfactor::transversal::{verify_transversal, GraphFamily};
use krfactor::verify::{verify_factor, Violation};
use krfactor::{Error, PartiteGraph, RandomSeed, Result, Vertex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JansonConfig {
    pub p: f64,
    pub trials: usize,
    pub seed: u64,
    /// Relative deviations for the lower-tail table.
    pub a_grid: Vec<f64>,
    /// Refuse graphs with more cliques than this.
    pub max_cliques: u64,
}

impl Default for JansonConfig {
    fn default() -> Self {
        JansonConfig {
            p: 0.5,
            trials: 10_000,
            seed: 0,
            a_grid: vec![0.1, 0.25, 0.5, 0.75, 0.9],
            max_cliques: 20_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub a: f64,
    /// Upper bound on `P[X ≤ (1 − a)λ]`; absent when `Δ̄ = 0`.
    pub bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JansonReport {
    pub config: JansonConfig,
    pub r: usize,
    pub n: usize,
    pub clique_count: usize,
    pub lambda: f64,
    pub delta_bar: f64,
    pub bounds: Vec<TailRow>,
    pub monte_carlo_mean: f64,
    pub monte_carlo_sd: f64,
}

/// Exact `λ`, `Δ̄` over every clique of `g`, the Janson lower-tail table, and
/// the mean surviving count over `trials` sparsifications.
pub fn janson_report(g: &PartiteGraph, cfg: &JansonConfig) -> Result<JansonReport> {
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let all: Vec<Vec<Vertex>> = (0..g.r()).map(|i| g.part_range(i).collect()).collect();
    let count = count_kr_induced(g, &all)?;
    if count > cfg.max_cliques {
        return Err(Error::GuardExceeded(format!(
            "{count} cliques exceed the limit of {}",
            cfg.max_cliques
        )));
    }
    let family = enumerate_kr(g);
    let m = janson_lambda_delta(&family, cfg.p)?;
    let bounds = cfg
        .a_grid
        .iter()
        .map(|&a| {
            let input = TailBoundInput {
                lambda_exp: m.lambda,
                delta_bar: m.delta_bar,
                a,
                ..TailBoundInput::default()
            };
            TailRow {
                a,
                bound: janson_lower_bound(&input).ok(),
            }
        })
        .collect();
    let base = RandomSeed::new(cfg.seed);
    let counts = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            sparsify(g, cfg.p, base.derive(t as u64)).map(|h| surviving_count(&family, &h) as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    let var = if counts.len() > 1 {
        counts.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (counts.len() - 1) as f64
    } else {
        0.0
    };
    Ok(JansonReport {
        config: cfg.clone(),
        r: g.r(),
        n: g.n(),
        clique_count: family.len(),
        lambda: m.lambda,
        delta_bar: m.delta_bar,
        bounds,
        monte_carlo_mean: mean,
        monte_carlo_sd: var.sqrt(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineRun {
    pub p: f64,
    pub seed: u64,
    pub config: PipelineConfig,
    /// Where the instance came from.
    pub source: String,
    pub report: PipelineReport,
}

pub fn pipeline_run(
    inst: &PartitionedInstance,
    source: String,
    p: f64,
    seed: u64,
    config: &PipelineConfig,
) -> Result<PipelineRun> {
    let report = run_pipeline(inst, p, RandomSeed::new(seed), config)?;
    Ok(PipelineRun {
        p,
        seed,
        config: *config,
        source,
        report,
    })
}

/// Checks a factor certificate against `g`, or a transversal certificate
/// against `family` when one is given.
pub fn verify_certificate(
    g: Option<&PartiteGraph>,
    family: Option<&GraphFamily>,
    cert: &TransversalCertificate,
) -> Result<std::result::Result<(), Violation>> {
    match (family, g) {
        (Some(fam), _) => Ok(verify_transversal(fam, &cert.cliques, &cert.assignment)),
        (None, Some(g)) => Ok(verify_factor(g, &cert.cliques)),
        (None, None) => Err(Error::InvalidParameter(
            "need a graph or a family manifest".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k222_at_half() {
        let g = PartiteGraph::complete(3, 2).unwrap();
        let rep = janson_report(
            &g,
            &JansonConfig {
                trials: 100,
                ..JansonConfig::default()
            },
        )
        .unwrap();
        assert_eq!(
            (rep.lambda, rep.delta_bar, rep.clique_count),
            (1.0, 2.125, 8)
        );
        assert_eq!(rep.bounds.len(), 5);
    }

    #[test]
    fn clique_guard() {
        let g = PartiteGraph::complete(3, 4).unwrap();
        let cfg = JansonConfig {
            max_cliques: 10,
            ..JansonConfig::default()
        };
        assert!(matches!(
            janson_report(&g, &cfg),
            Err(Error::GuardExceeded(_))
        ));
    }
}
