use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use ascpr::cpr::ascpr_gmres_sequence;
use ascpr::harness::{
    hierarchy_summary, report, run_benchmark, verify_matrix, BenchConfig, ProblemSequence, Provenance,
};
use ascpr::parallel::with_workers;
use ascpr::smoothers::SmootherKind;
use ascpr::sparse::io::{read_block_matrix_market, read_vector, write_vector};
use ascpr::sparse::{BlockCsrMatrix, BlockSparse};
use ascpr::SolverError;

#[derive(Parser)]
#[command(name = "ascpr", version, about = "CPR-GMRES with adaptive setup reuse")]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug, Default)]
struct Overrides {
    /// TOML or JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    workers: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    theta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    mu: Option<Vec<usize>>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic sequence as MatrixMarket files plus a manifest.
    Generate {
        #[command(flatten)]
        o: Overrides,
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        ny: Option<usize>,
        #[arg(long)]
        nz: Option<usize>,
        #[arg(long)]
        nsteps: Option<usize>,
        #[arg(long)]
        drift: Option<f64>,
    },
    /// Solve one matrix, a manifest sequence, or the configured synthetic sequence.
    Solve {
        #[command(flatten)]
        o: Overrides,
        #[arg(long, conflicts_with = "manifest")]
        matrix: Option<PathBuf>,
        #[arg(long, requires = "matrix")]
        rhs: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Reinterpret the matrix with this block size.
        #[arg(long)]
        block_size: Option<usize>,
        #[arg(long)]
        smoother: Option<SmootherKind>,
    },
    /// Run the benchmark grid and write report.csv, report.json, hierarchy.json.
    Bench {
        #[command(flatten)]
        o: Overrides,
        #[arg(long, value_delimiter = ',')]
        smoother: Option<Vec<SmootherKind>>,
    },
    /// Check coloring, BILU(0) and AMG properties on a matrix.
    Verify {
        #[command(flatten)]
        o: Overrides,
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        block_size: Option<usize>,
    },
}

enum Failure {
    Input(String),
    Solver(String),
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::SingularDiagonal { .. }
            | SolverError::SingularPivot { .. }
            | SolverError::Divergence { .. }
            | SolverError::CoarseSolve(_) => Failure::Solver(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn with_path(path: &Path, e: SolverError) -> Failure {
    match Failure::from(e) {
        Failure::Input(m) => Failure::Input(format!("{}: {m}", path.display())),
        f => f,
    }
}

fn load_config(o: &Overrides) -> Result<BenchConfig, Failure> {
    let mut cfg = match &o.config {
        Some(p) => BenchConfig::load(p).map_err(|e| with_path(p, e))?,
        None => BenchConfig::default(),
    };
    if let Some(s) = o.seed {
        cfg.problem.seed = s;
    }
    if let Some(w) = &o.workers {
        cfg.workers = w.clone();
    }
    if let Some(t) = &o.theta {
        cfg.theta = t.clone();
    }
    if let Some(m) = &o.mu {
        cfg.mu = m.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read_matrix(path: &Path, block_size: Option<usize>) -> Result<BlockCsrMatrix<f64>, Failure> {
    let a = read_block_matrix_market::<f64>(path).map_err(|e| with_path(path, e))?;
    match block_size {
        Some(b) if b != a.block_size() => Ok(BlockCsrMatrix::from_scalar(&a.to_scalar(), b)?),
        _ => Ok(a),
    }
}

fn generate(
    o: &Overrides,
    dims: [Option<usize>; 4],
    drift: Option<f64>,
) -> Result<(), Failure> {
    let cfg = load_config(o)?;
    let mut g = cfg.problem.clone();
    let [nx, ny, nz, nsteps] = dims;
    g.nx = nx.unwrap_or(g.nx);
    g.ny = ny.unwrap_or(g.ny);
    g.nz = nz.unwrap_or(g.nz);
    g.nsteps = nsteps.unwrap_or(g.nsteps);
    g.drift = drift.unwrap_or(g.drift);
    let seq = ProblemSequence::synthetic(&g)?;
    let out = o.out.clone().unwrap_or_else(|| PathBuf::from("problem"));
    let manifest = seq.write_to_dir(&out)?;
    println!(
        "wrote {} systems of size {} to {}",
        seq.len(),
        seq.systems[0].0.dim(),
        manifest.display()
    );
    Ok(())
}

fn solve(
    o: &Overrides,
    matrix: Option<PathBuf>,
    rhs: Option<PathBuf>,
    manifest: Option<PathBuf>,
    block_size: Option<usize>,
    smoother: Option<SmootherKind>,
) -> Result<(), Failure> {
    let cfg = load_config(o)?;
    let problem = if let Some(m) = &matrix {
        let a = read_matrix(m, block_size)?;
        let b = match &rhs {
            Some(r) => read_vector(r).map_err(|e| with_path(r, e))?,
            None => vec![1.0; a.dim()],
        };
        if b.len() != a.dim() {
            return Err(Failure::Input(format!("rhs has {} entries, matrix has {} rows", b.len(), a.dim())));
        }
        ProblemSequence {
            systems: vec![(Arc::new(a), b)],
            provenance: Provenance::Manifest {
                path: m.clone(),
                systems: 1,
            },
        }
    } else if let Some(m) = &manifest {
        ProblemSequence::from_manifest(m).map_err(|e| with_path(m, e))?
    } else {
        cfg.load_problem()?
    };
    let smoother = smoother.unwrap_or(cfg.smoother[0]);
    let params = cfg.sequence_params(cfg.theta[0], cfg.mu[0], smoother);
    let workers = cfg.workers[0];
    let outcome = with_workers(workers, || ascpr_gmres_sequence(&problem.systems, &params))?;
    for (k, s) in outcome.systems.iter().enumerate() {
        println!(
            "system {:>3}: {} iterations {:>4} restarts {:>3} relres {:.3e} {}",
            k + 1,
            if s.reused { "reuse" } else { "setup" },
            s.iterations,
            s.restarts,
            s.relative_residual,
            if s.converged { "converged" } else { "NOT CONVERGED" }
        );
    }
    println!(
        "setup_calls {} iter {} time {:.3}s (setup {:.3}s, solve {:.3}s)",
        outcome.setup_calls,
        outcome.total_iterations,
        outcome.total_seconds,
        outcome.setup_seconds,
        outcome.solve_seconds
    );
    if let Some(out) = &o.out {
        std::fs::create_dir_all(out).map_err(|e| Failure::Input(e.to_string()))?;
        for (k, s) in outcome.systems.iter().enumerate() {
            write_vector(&s.x, out.join(format!("solution_{:03}.mtx", k + 1)))?;
        }
    }
    if outcome.all_converged() {
        Ok(())
    } else {
        Err(Failure::Solver("not every system reached the tolerance".into()))
    }
}

fn bench(o: &Overrides, smoother: Option<Vec<SmootherKind>>) -> Result<(), Failure> {
    let mut cfg = load_config(o)?;
    if let Some(s) = smoother {
        cfg.smoother = s;
    }
    cfg.validate()?;
    let problem = cfg.load_problem()?;
    let rep = run_benchmark(&cfg, &problem)?;
    let hierarchy = hierarchy_summary(&cfg, &problem)?;
    let out = o.out.clone().unwrap_or_else(|| PathBuf::from("runs"));
    report::write_outputs(&rep, Some(&hierarchy), &out)?;
    println!(
        "{:<9} {:>6} {:>4} {:>7} {:>10} {:>10} {:>7} {:>9} {:>8} {:>9}  status",
        "smoother", "theta", "mu", "workers", "SetupCalls", "SetupRatio", "Iter", "Time(s)", "Speedup", "Speedup*"
    );
    let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.2}"));
    for r in &rep.rows {
        println!(
            "{:<9} {:>6} {:>4} {:>7} {:>10} {:>10.3} {:>7} {:>9.3} {:>8} {:>9}  {}",
            r.smoother.to_string(),
            r.theta,
            r.mu,
            r.workers,
            r.setup_calls,
            r.setup_ratio,
            r.iter,
            r.time_seconds,
            fmt(r.speedup),
            fmt(r.speedup_star),
            r.status
        );
    }
    println!("reports written to {}", out.display());
    Ok(())
}

fn verify(o: &Overrides, matrix: &Path, block_size: Option<usize>) -> Result<(), Failure> {
    let cfg = load_config(o)?;
    let a = read_matrix(matrix, block_size)?;
    let theta = cfg.theta[0];
    let rep = verify_matrix(&a, theta, &cfg.amg(theta, SmootherKind::PgsScm))?;
    println!("theta {theta}: {} colors, AMG levels {:?}", rep.colors, rep.amg_levels);
    for c in &rep.checks {
        println!("{} {:<28} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if let Some(out) = &o.out {
        std::fs::create_dir_all(out).map_err(|e| Failure::Input(e.to_string()))?;
        let text = serde_json::to_string_pretty(&rep).map_err(|e| Failure::Input(e.to_string()))?;
        std::fs::write(out.join("verify.json"), text).map_err(|e| Failure::Input(e.to_string()))?;
    }
    if rep.all_passed() {
        Ok(())
    } else {
        Err(Failure::Solver("property checks failed".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    let result = match cli.command {
        Command::Generate {
            o,
            nx,
            ny,
            nz,
            nsteps,
            drift,
        } => generate(&o, [nx, ny, nz, nsteps], drift),
        Command::Solve {
            o,
            matrix,
            rhs,
            manifest,
            block_size,
            smoother,
        } => solve(&o, matrix, rhs, manifest, block_size, smoother),
        Command::Bench { o, smoother } => bench(&o, smoother),
        Command::Verify { o, matrix, block_size } => verify(&o, &matrix, block_size),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Solver(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
