use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::BenchConfig;
use super::problem::{ProblemSequence, Provenance};
use crate::amg::{build_hierarchy, HierarchySummary};
use crate::cpr::ascpr_gmres_sequence;
use crate::error::Result;
use crate::parallel::with_workers;
use crate::smoothers::SmootherKind;

pub const SCHEMA_VERSION: u32 = 1;

/// One benchmark cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub smoother: SmootherKind,
    pub theta: f64,
    pub mu: usize,
    pub workers: usize,
    pub systems: usize,
    pub setup_calls: usize,
    /// Setup wall time over total wall time.
    pub setup_ratio: f64,
    /// Sum of the per-system iteration counts used by the reuse rule.
    pub iter: usize,
    pub restarts: usize,
    pub inner_iterations: usize,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
    pub overhead_seconds: f64,
    pub time_seconds: f64,
    /// Same smoother, theta and mu on one worker, over this time.
    pub speedup: Option<f64>,
    /// Same smoother and theta with mu = 0 on one worker, over this time.
    pub speedup_star: Option<f64>,
    pub converged: bool,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    /// Times cover the linear solver only.
    pub timing: String,
    pub provenance: Provenance,
    pub config: BenchConfig,
    pub rows: Vec<RunRow>,
}

impl RunReport {
    pub fn row(&self, smoother: SmootherKind, theta: f64, mu: usize, workers: usize) -> Option<&RunRow> {
        self.rows
            .iter()
            .find(|r| r.smoother == smoother && r.theta == theta && r.mu == mu && r.workers == workers)
    }
}

fn sorted_with<T: Copy + PartialOrd>(mut v: Vec<T>, must: T) -> Vec<T> {
    if !v.contains(&must) {
        v.push(must);
    }
    v.sort_by(|a, b| a.partial_cmp(b).expect("comparable grid values"));
    v.dedup();
    v
}

fn run_cell(
    config: &BenchConfig,
    problem: &ProblemSequence,
    smoother: SmootherKind,
    theta: f64,
    mu: usize,
    workers: usize,
) -> RunRow {
    let params = config.sequence_params(theta, mu, smoother);
    let start = Instant::now();
    let outcome = with_workers(workers, || ascpr_gmres_sequence(&problem.systems, &params));
    let wall = start.elapsed().as_secs_f64();
    let mut row = RunRow {
        smoother,
        theta,
        mu,
        workers,
        systems: problem.len(),
        setup_calls: 0,
        setup_ratio: 0.0,
        iter: 0,
        restarts: 0,
        inner_iterations: 0,
        setup_seconds: 0.0,
        solve_seconds: 0.0,
        overhead_seconds: 0.0,
        time_seconds: wall,
        speedup: None,
        speedup_star: None,
        converged: false,
        status: String::new(),
    };
    match outcome {
        Ok(o) => {
            let time = o.total_seconds;
            row.setup_calls = o.setup_calls;
            row.iter = o.total_iterations;
            row.restarts = o.systems.iter().map(|s| s.restarts).sum();
            row.inner_iterations = o.systems.iter().map(|s| s.inner_iterations).sum();
            row.setup_seconds = o.setup_seconds;
            row.solve_seconds = o.solve_seconds;
            row.overhead_seconds = (time - o.setup_seconds - o.solve_seconds).max(0.0);
            row.time_seconds = time;
            row.setup_ratio = if time > 0.0 { (o.setup_seconds / time).clamp(0.0, 1.0) } else { 0.0 };
            row.converged = o.all_converged();
            row.status = if row.converged { "ok".into() } else { "not-converged".into() };
        }
        Err(e) => {
            log::warn!("cell smoother={smoother} theta={theta} mu={mu} workers={workers} failed: {e}");
            row.status = format!("error: {e}");
        }
    }
    row
}

fn ratio(base: &RunRow, row: &RunRow) -> Option<f64> {
    let ok = |r: &RunRow| !r.status.starts_with("error") && r.time_seconds > 0.0;
    if !ok(base) || !ok(row) {
        return None;
    }
    if std::ptr::eq(base, row) {
        return Some(1.0);
    }
    Some(base.time_seconds / row.time_seconds)
}

/// Runs every (smoother, theta, mu, workers) cell in turn. The grid always
/// contains `workers = 1` and `mu = 0`, which the speedup columns refer to.
pub fn run_benchmark(config: &BenchConfig, problem: &ProblemSequence) -> Result<RunReport> {
    config.validate()?;
    problem.validate()?;
    let thetas = sorted_with(config.theta.clone(), config.theta[0]);
    let mus = sorted_with(config.mu.clone(), 0);
    let workers = sorted_with(config.workers.clone(), 1);
    let mut rows = Vec::new();
    for &smoother in &config.smoother {
        for &theta in &thetas {
            for &mu in &mus {
                for &w in &workers {
                    log::info!("cell smoother={smoother} theta={theta} mu={mu} workers={w}");
                    rows.push(run_cell(config, problem, smoother, theta, mu, w));
                }
            }
        }
    }
    let speedups: Vec<(Option<f64>, Option<f64>)> = rows
        .iter()
        .map(|row| {
            let find = |mu: usize| {
                rows.iter().find(|b| {
                    b.smoother == row.smoother && b.theta == row.theta && b.mu == mu && b.workers == 1
                })
            };
            (
                find(row.mu).and_then(|b| ratio(b, row)),
                find(0).and_then(|b| ratio(b, row)),
            )
        })
        .collect();
    for (row, (s, s_star)) in rows.iter_mut().zip(speedups) {
        row.speedup = s;
        row.speedup_star = s_star;
    }
    Ok(RunReport {
        schema: SCHEMA_VERSION,
        timing: "linear solver only (setup + solve per sequence)".into(),
        provenance: problem.provenance.clone(),
        config: config.clone(),
        rows,
    })
}

/// Pressure AMG hierarchy of the first system for the first grid cell.
pub fn hierarchy_summary(config: &BenchConfig, problem: &ProblemSequence) -> Result<HierarchySummary> {
    let (a, _) = &problem.systems[0];
    let app = a.component(0)?;
    let h = build_hierarchy(&app, &config.amg(config.theta[0], config.smoother[0]))?;
    Ok(h.summary())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::generator::GeneratorParams;

    fn tiny_config() -> BenchConfig {
        BenchConfig {
            mu: vec![20],
            workers: vec![2],
            problem: GeneratorParams {
                nx: 6,
                ny: 6,
                nz: 2,
                nsteps: 3,
                drift: 0.0,
                ..GeneratorParams::default()
            },
            ..BenchConfig::default()
        }
    }

    #[test]
    fn baseline_cells_are_added() {
        let cfg = tiny_config();
        let p = cfg.load_problem().unwrap();
        let rep = run_benchmark(&cfg, &p).unwrap();
        assert_eq!(rep.rows.len(), 4);
        let base = rep.row(SmootherKind::PgsScm, 0.0, 0, 1).unwrap();
        assert_eq!(base.speedup, Some(1.0));
        assert_eq!(base.speedup_star, Some(1.0));
        assert_eq!(base.setup_calls, 3);
        let reuse = rep.row(SmootherKind::PgsScm, 0.0, 20, 1).unwrap();
        assert_eq!(reuse.speedup, Some(1.0));
        assert!(reuse.setup_calls <= base.setup_calls);
        assert!(rep.rows.iter().all(|r| r.converged && (0.0..=1.0).contains(&r.setup_ratio)));
        let two = rep.row(SmootherKind::PgsScm, 0.0, 20, 2).unwrap();
        assert_eq!(two.iter, reuse.iter);
    }
}
