use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use super::generator::GeneratorParams;
use super::problem::{read_config, ProblemSequence};
use crate::amg::{AmgParams, CycleKind};
use crate::cpr::{CprParams, GmresParams, IterationCounter, SequenceParams};
use crate::error::{Result, SolverError};
use crate::ilu::PivotPolicy;
use crate::smoothers::SmootherKind;

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

fn one_or_many<'de, D, T>(d: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

/// Benchmark grid and solver settings. Grid axes accept a scalar or a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(deserialize_with = "one_or_many")]
    pub theta: Vec<f64>,
    #[serde(deserialize_with = "one_or_many")]
    pub mu: Vec<usize>,
    #[serde(deserialize_with = "one_or_many")]
    pub workers: Vec<usize>,
    #[serde(deserialize_with = "one_or_many", alias = "smoother_kind")]
    pub smoother: Vec<SmootherKind>,
    #[serde(alias = "m")]
    pub restart: usize,
    #[serde(alias = "MaxIt", alias = "max_it")]
    pub max_restarts: usize,
    pub tol: f64,
    pub cycle: CycleKind,
    pub coarsest_size: usize,
    pub max_levels: usize,
    pub theta_amg: f64,
    pub sweeps: usize,
    pub counter: IterationCounter,
    pub pivot: PivotPolicy,
    /// Synthetic problem; ignored when `manifest` is set.
    pub problem: GeneratorParams,
    pub manifest: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        let g = GmresParams::default();
        let a = AmgParams::default();
        Self {
            theta: vec![0.0],
            mu: vec![0],
            workers: vec![1],
            smoother: vec![SmootherKind::PgsScm],
            restart: g.restart,
            max_restarts: g.max_restarts,
            tol: g.tol,
            cycle: a.cycle,
            coarsest_size: a.coarsest_size,
            max_levels: a.max_levels,
            theta_amg: a.theta_amg,
            sweeps: a.pre_sweeps,
            counter: IterationCounter::default(),
            pivot: PivotPolicy::default(),
            problem: GeneratorParams::default(),
            manifest: None,
        }
    }
}

impl BenchConfig {
    /// Reads TOML or JSON (by extension). A relative manifest path is taken
    /// relative to the config file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg: BenchConfig = read_config(path)?;
        if let (Some(m), Some(dir)) = (&cfg.manifest, path.parent()) {
            if m.is_relative() {
                cfg.manifest = Some(dir.join(m));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SolverError::InvalidParameter(m.into()));
        if self.theta.is_empty() || self.mu.is_empty() || self.workers.is_empty() || self.smoother.is_empty() {
            return bad("theta, mu, workers and smoother need at least one value");
        }
        if self.theta.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return bad("theta must lie in [0, 1]");
        }
        if self.workers.contains(&0) {
            return bad("workers must be at least 1");
        }
        if self.sweeps == 0 {
            return bad("sweeps must be at least 1");
        }
        self.gmres().validate()?;
        if self.manifest.is_none() {
            self.problem.validate()?;
        }
        Ok(())
    }

    pub fn gmres(&self) -> GmresParams {
        GmresParams {
            restart: self.restart,
            max_restarts: self.max_restarts,
            tol: self.tol,
        }
    }

    pub fn amg(&self, theta: f64, smoother: SmootherKind) -> AmgParams {
        AmgParams {
            coarsest_size: self.coarsest_size,
            max_levels: self.max_levels,
            theta_amg: self.theta_amg,
            theta_color: theta,
            pre_sweeps: self.sweeps,
            post_sweeps: self.sweeps,
            smoother,
            cycle: self.cycle,
            ..AmgParams::default()
        }
    }

    pub fn sequence_params(&self, theta: f64, mu: usize, smoother: SmootherKind) -> SequenceParams {
        SequenceParams {
            mu,
            counter: self.counter,
            gmres: self.gmres(),
            cpr: CprParams {
                amg: self.amg(theta, smoother),
                pivot: self.pivot,
            },
        }
    }

    pub fn load_problem(&self) -> Result<ProblemSequence> {
        match &self.manifest {
            Some(m) => ProblemSequence::from_manifest(m),
            None => ProblemSequence::synthetic(&self.problem),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalars_and_lists() {
        let c: BenchConfig = toml::from_str(
            "theta = 0.25\nmu = [0, 20]\nworkers = [1, 2]\nsmoother = \"pgs-no\"\nMaxIt = 7\nm = 10\n[problem]\nnx = 4\n",
        )
        .unwrap();
        assert_eq!(c.theta, vec![0.25]);
        assert_eq!(c.mu, vec![0, 20]);
        assert_eq!(c.smoother, vec![SmootherKind::PgsNo]);
        assert_eq!((c.max_restarts, c.restart), (7, 10));
        assert_eq!(c.problem.nx, 4);
        assert_eq!(c.problem.ny, 32);
        c.validate().unwrap();
    }

    #[test]
    fn json_config() {
        let c: BenchConfig = serde_json::from_str(r#"{"mu": 5, "cycle": "v", "smoother_kind": ["pgs-scm", "classic-gs"]}"#).unwrap();
        assert_eq!(c.mu, vec![5]);
        assert_eq!(c.cycle, CycleKind::V);
        assert_eq!(c.smoother.len(), 2);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(toml::from_str::<BenchConfig>("thetta = 0.1").is_err());
    }

    #[test]
    fn invalid_values() {
        let c = BenchConfig {
            theta: vec![1.5],
            ..BenchConfig::default()
        };
        assert!(c.validate().is_err());
        let c = BenchConfig {
            workers: vec![0],
            ..BenchConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
