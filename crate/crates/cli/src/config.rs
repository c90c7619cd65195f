//! Sweep configuration. Every output embeds the full config, so any row can
//! be reproduced from it.

use std::path::Path;

use krfactor::graph::{threshold_p, ThresholdParams};
use krfactor::{Error, Result, SolverConfig};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Factor of `G(p)` for a minimum-degree host.
    Threshold,
    /// Transversal factor of a graph family.
    Transversal,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Threshold => "threshold",
            Mode::Transversal => "transversal",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub r: usize,
    pub n: Vec<usize>,
    pub gamma: f64,
    /// Threshold constants; `p = threshold_p(C, r, n)` per point.
    pub c_grid: Vec<f64>,
    /// Direct probabilities, used when `c_grid` is empty.
    pub p_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Kept-edge fraction handed to the minimum-degree generator.
    pub edge_keep: f64,
    pub solver: SolverConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: Mode::Threshold,
            r: 3,
            n: vec![30],
            gamma: 0.2,
            c_grid: vec![0.1, 0.2, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0],
            p_grid: Vec::new(),
            trials: 200,
            seed: 0,
            edge_keep: 0.0,
            solver: SolverConfig {
                node_budget: Some(10_000_000),
                ..SolverConfig::default()
            },
        }
    }
}

/// One grid point of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub n: usize,
    pub c: Option<f64>,
    pub p: f64,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.n.is_empty() {
            return bad("the n list is empty".into());
        }
        if self.c_grid.is_empty() == self.p_grid.is_empty() {
            return bad("give exactly one of c_grid and p_grid".into());
        }
        if let Some(p) = self.p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return bad(format!("probability {p} outside [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.edge_keep) {
            return bad(format!("edge_keep {} outside [0, 1]", self.edge_keep));
        }
        for &n in &self.n {
            for &c in &self.c_grid {
                ThresholdParams::new(c, self.r, n, self.gamma)?;
            }
        }
        if self.r < 2 {
            return bad(format!("r must be at least 2, got {}", self.r));
        }
        Ok(())
    }

    /// Grid points in output order: `n` outer, grid value inner.
    pub fn points(&self) -> Result<Vec<Point>> {
        let mut out = Vec::new();
        for &n in &self.n {
            if self.c_grid.is_empty() {
                out.extend(self.p_grid.iter().map(|&p| Point { n, c: None, p }));
            } else {
                for &c in &self.c_grid {
                    let t = threshold_p(&ThresholdParams::new(c, self.r, n, self.gamma)?);
                    out.push(Point {
                        n,
                        c: Some(c),
                        p: t.p,
                    });
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_round_trips() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(
            serde_json::from_str::<ExperimentConfig>(&text).unwrap(),
            cfg
        );
    }

    #[test]
    fn rejections() {
        let zero = ExperimentConfig {
            trials: 0,
            ..ExperimentConfig::default()
        };
        assert!(zero.validate().is_err());
        let both = ExperimentConfig {
            p_grid: vec![0.5],
            ..ExperimentConfig::default()
        };
        assert!(both.validate().is_err());
        let no_n = ExperimentConfig {
            n: vec![],
            ..ExperimentConfig::default()
        };
        assert!(no_n.validate().is_err());
    }

    #[test]
    fn points_follow_grid_order() {
        let cfg = ExperimentConfig {
            n: vec![6, 9],
            c_grid: vec![1.0, 100.0],
            ..ExperimentConfig::default()
        };
        let pts = cfg.points().unwrap();
        assert_eq!(
            pts.iter().map(|p| (p.n, p.c)).collect::<Vec<_>>(),
            vec![
                (6, Some(1.0)),
                (6, Some(100.0)),
                (9, Some(1.0)),
                (9, Some(100.0))
            ]
        );
        assert_eq!(pts[1].p, 1.0);
    }
}
