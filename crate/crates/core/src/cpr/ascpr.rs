use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::gmres::{gmres_solve, GmresParams};
use super::{build_cpr, CprParams, CprPreconditioner, Fingerprint};
use crate::error::{Result, SolverError};
use crate::scalar::Scalar;
use crate::sparse::BlockCsrMatrix;

/// Which iteration count is compared against `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum IterationCounter {
    /// Arnoldi steps summed over all restart cycles.
    #[default]
    Inner,
    /// Outer restart cycles.
    Restarts,
}

impl std::str::FromStr for IterationCounter {
    type Err = SolverError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inner" => Ok(Self::Inner),
            "restarts" => Ok(Self::Restarts),
            other => Err(SolverError::InvalidParameter(format!("unknown counter {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AscprDecision {
    Reuse,
    Rebuild,
}

/// State carried from one system of a sequence to the next.
#[derive(Debug, Clone)]
pub struct AscprCache<T> {
    prev: Option<Arc<CprPreconditioner<T>>>,
    prev_iters: Option<usize>,
    mu: usize,
    setup_calls: usize,
}

impl<T: Scalar> AscprCache<T> {
    pub fn new(mu: usize) -> Self {
        Self {
            prev: None,
            prev_iters: None,
            mu,
            setup_calls: 0,
        }
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn setup_calls(&self) -> usize {
        self.setup_calls
    }

    pub fn prev_iters(&self) -> Option<usize> {
        self.prev_iters
    }

    pub fn previous(&self) -> Option<&Arc<CprPreconditioner<T>>> {
        self.prev.as_ref()
    }

    /// Stores a freshly built preconditioner and counts the setup.
    pub fn record_build(&mut self, pc: Arc<CprPreconditioner<T>>) {
        self.prev = Some(pc);
        self.prev_iters = None;
        self.setup_calls += 1;
    }

    pub fn record_iterations(&mut self, it: usize) {
        self.prev_iters = Some(it);
    }
}

/// Reuse only when `k > 1`, a previous preconditioner exists, its solve took
/// at most `mu` iterations and the matrix sizes agree. `mu = 0` always
/// rebuilds.
pub fn ascpr_decide<T: Scalar>(cache: &AscprCache<T>, k: usize, a: &BlockCsrMatrix<T>) -> AscprDecision {
    match (&cache.prev, cache.prev_iters) {
        (Some(pc), Some(it)) if k > 1 && cache.mu > 0 && it <= cache.mu && pc.fingerprint() == Fingerprint::of(a) => {
            AscprDecision::Reuse
        }
        _ => AscprDecision::Rebuild,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct SequenceParams {
    pub mu: usize,
    pub counter: IterationCounter,
    pub gmres: GmresParams,
    pub cpr: CprParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemOutcome<T> {
    pub x: Vec<T>,
    pub restarts: usize,
    pub inner_iterations: usize,
    /// The count selected by [`IterationCounter`].
    pub iterations: usize,
    pub converged: bool,
    pub reused: bool,
    pub relative_residual: f64,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceOutcome<T> {
    pub systems: Vec<SystemOutcome<T>>,
    pub setup_calls: usize,
    pub total_iterations: usize,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
    pub total_seconds: f64,
}

impl<T> SequenceOutcome<T> {
    pub fn all_converged(&self) -> bool {
        self.systems.iter().all(|s| s.converged)
    }
}

/// Solves every system in order, rebuilding CPR only when the adaptive rule
/// asks for it. Each solve starts from a zero guess.
pub fn ascpr_gmres_sequence<T: Scalar>(
    systems: &[(Arc<BlockCsrMatrix<T>>, Vec<T>)],
    params: &SequenceParams,
) -> Result<SequenceOutcome<T>> {
    if systems.is_empty() {
        return Err(SolverError::InvalidParameter("empty system sequence".into()));
    }
    params.gmres.validate()?;
    let start = Instant::now();
    let mut cache = AscprCache::new(params.mu);
    let mut out = Vec::with_capacity(systems.len());
    let (mut setup_total, mut solve_total) = (0.0, 0.0);
    for (idx, (a, b)) in systems.iter().enumerate() {
        let k = idx + 1;
        let decision = ascpr_decide(&cache, k, a);
        let mut setup_seconds = 0.0;
        if decision == AscprDecision::Rebuild {
            let t = Instant::now();
            let pc = build_cpr(Arc::clone(a), &params.cpr)?;
            setup_seconds = t.elapsed().as_secs_f64();
            cache.record_build(Arc::new(pc));
        }
        let pc = Arc::clone(cache.previous().expect("built above or reused"));
        let t = Instant::now();
        let x0 = vec![T::zero(); b.len()];
        let res = gmres_solve(a.as_ref(), b, &x0, pc.as_ref(), &params.gmres)?;
        let solve_seconds = t.elapsed().as_secs_f64();
        let iterations = match params.counter {
            IterationCounter::Inner => res.inner_iterations,
            IterationCounter::Restarts => res.restarts,
        };
        cache.record_iterations(iterations);
        log::info!(
            "system {k}: {} it {iterations} (restarts {}), rel {:.3e}",
            if decision == AscprDecision::Reuse { "reuse" } else { "setup" },
            res.restarts,
            res.relative_residual
        );
        setup_total += setup_seconds;
        solve_total += solve_seconds;
        out.push(SystemOutcome {
            x: res.x,
            restarts: res.restarts,
            inner_iterations: res.inner_iterations,
            iterations,
            converged: res.converged,
            reused: decision == AscprDecision::Reuse,
            relative_residual: res.relative_residual,
            setup_seconds,
            solve_seconds,
        });
    }
    Ok(SequenceOutcome {
        total_iterations: out.iter().map(|s| s.iterations).sum(),
        systems: out,
        setup_calls: cache.setup_calls(),
        setup_seconds: setup_total,
        solve_seconds: solve_total,
        total_seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::CsrMatrix;

    fn system(n: usize, shift: f64) -> BlockCsrMatrix<f64> {
        let mut e = Vec::new();
        for i in 0..n {
            e.push((i, i, 4.0 + shift));
            if i > 0 {
                e.push((i, i - 1, -1.0));
                e.push((i - 1, i, -1.5));
            }
        }
        BlockCsrMatrix::from_scalar(&CsrMatrix::from_triplets(n, n, e).unwrap(), 2).unwrap()
    }

    fn cache_after(mu: usize, n: usize, iters: usize) -> AscprCache<f64> {
        let mut c = AscprCache::new(mu);
        let pc = build_cpr(Arc::new(system(n, 0.0)), &CprParams::default()).unwrap();
        c.record_build(Arc::new(pc));
        c.record_iterations(iters);
        c
    }

    #[test]
    fn first_system_always_builds() {
        let c = cache_after(100, 8, 1);
        assert_eq!(ascpr_decide(&c, 1, &system(8, 0.0)), AscprDecision::Rebuild);
    }

    #[test]
    fn mu_zero_always_builds() {
        let c = cache_after(0, 8, 0);
        assert_eq!(ascpr_decide(&c, 2, &system(8, 0.0)), AscprDecision::Rebuild);
    }

    #[test]
    fn rule_application() {
        let c = cache_after(20, 8, 15);
        assert_eq!(ascpr_decide(&c, 3, &system(8, 0.5)), AscprDecision::Reuse);
        let c = cache_after(20, 8, 21);
        assert_eq!(ascpr_decide(&c, 3, &system(8, 0.5)), AscprDecision::Rebuild);
        let c = cache_after(20, 8, 15);
        assert_eq!(ascpr_decide(&c, 3, &system(10, 0.0)), AscprDecision::Rebuild);
    }

    #[test]
    fn empty_cache_builds() {
        let c = AscprCache::<f64>::new(50);
        assert_eq!(ascpr_decide(&c, 2, &system(8, 0.0)), AscprDecision::Rebuild);
    }

    fn seq(sizes: &[usize]) -> Vec<(Arc<BlockCsrMatrix<f64>>, Vec<f64>)> {
        sizes
            .iter()
            .map(|&n| (Arc::new(system(n, 0.0)), vec![1.0; n]))
            .collect()
    }

    #[test]
    fn setup_counts() {
        let s = seq(&[20, 20, 20, 20]);
        let large = SequenceParams {
            mu: 1000,
            ..SequenceParams::default()
        };
        let out = ascpr_gmres_sequence(&s, &large).unwrap();
        assert_eq!(out.setup_calls, 1);
        assert!(out.all_converged());
        let zero = SequenceParams::default();
        assert_eq!(ascpr_gmres_sequence(&s, &zero).unwrap().setup_calls, 4);
        let resized = seq(&[20, 26, 26]);
        let out = ascpr_gmres_sequence(&resized, &large).unwrap();
        assert_eq!(out.setup_calls, 2);
        assert!(!out.systems[1].reused && out.systems[2].reused);
    }
}
