//! Property checks on a single matrix: coloring, BILU(0) and AMG.

use serde::Serialize;

use crate::amg::{build_hierarchy, AmgParams};
use crate::coloring::{color_matrix, verify_partition};
use crate::error::Result;
use crate::ilu::{bilu0_factorize, pattern_reconstruction_error, PivotPolicy};
use crate::parallel::with_workers;
use crate::sparse::{BlockCsrMatrix, BlockSparse};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub theta: f64,
    pub colors: usize,
    pub amg_levels: Vec<usize>,
    pub checks: Vec<PropertyCheck>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &str, passed: bool, detail: String) -> PropertyCheck {
    PropertyCheck {
        name: name.into(),
        passed,
        detail,
    }
}

/// Runs the coloring propositions at `theta`, BILU(0) reconstruction and
/// level-solve determinism, and the AMG hierarchy invariants on the
/// pressure component (the whole matrix when the block size is one).
pub fn verify_matrix(a: &BlockCsrMatrix<f64>, theta: f64, amg: &AmgParams) -> Result<VerifyReport> {
    let mut checks = Vec::new();

    let partition = color_matrix(a, theta)?;
    let rep = verify_partition(a, theta, &partition)?;
    for c in &rep.checks {
        checks.push(check(&format!("coloring.{}", c.name), c.passed, c.detail.clone()));
    }

    let f = bilu0_factorize(a, PivotPolicy::Perturb)?;
    let err = pattern_reconstruction_error(a, &f);
    checks.push(check(
        "ilu.reconstruction",
        err <= 1e-12,
        format!("max relative gap {err:.3e}, {} pivot shifts", f.warnings().len()),
    ));
    let r: Vec<f64> = (0..a.dim()).map(|i| ((i * 7919) % 1013) as f64 / 1013.0 - 0.5).collect();
    let reference = f.apply_sequential(&r)?;
    let mut same = true;
    for w in [1, 2, 8] {
        let z = with_workers(w, || f.apply(&r))?;
        same &= z.iter().zip(&reference).all(|(x, y)| x.to_bits() == y.to_bits());
    }
    checks.push(check(
        "ilu.level_solve",
        same,
        format!(
            "{} lower / {} upper levels, workers 1, 2, 8",
            f.lower_levels().num_levels(),
            f.upper_levels().num_levels()
        ),
    ));

    let app = a.component(0)?;
    let h = build_hierarchy(&app, amg)?;
    let sizes: Vec<usize> = h.levels().iter().map(|l| l.size()).collect();
    let gal = h.galerkin_errors()?;
    let worst = gal.iter().cloned().fold(0.0, f64::max);
    checks.push(check("amg.galerkin", worst <= 1e-13, format!("max relative gap {worst:.3e}")));
    let unit_rows = h.levels().iter().filter_map(|l| l.prolongation()).all(|p| {
        (0..p.nrows()).all(|i| {
            let (c, v) = p.row(i);
            c.len() == 1 && v[0] == 1.0
        })
    });
    checks.push(check("amg.prolongation", unit_rows, "one unit entry per row".into()));
    let decreasing = sizes.windows(2).all(|w| w[1] < w[0]);
    checks.push(check("amg.sizes", decreasing, format!("{sizes:?}")));

    Ok(VerifyReport {
        theta,
        colors: partition.num_colors(),
        amg_levels: sizes,
        checks,
    })
}
