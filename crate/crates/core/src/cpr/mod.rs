//! Two-stage CPR preconditioner, restarted GMRES and adaptive setup reuse.

mod ascpr;
mod gmres;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use ascpr::{
    ascpr_decide, ascpr_gmres_sequence, AscprCache, AscprDecision, IterationCounter, SequenceOutcome,
    SequenceParams, SystemOutcome,
};
pub use gmres::{gmres_solve, GmresOutcome, GmresParams, IdentityPreconditioner, LinearOperator, Preconditioner};

use crate::amg::{build_hierarchy, AmgHierarchy, AmgParams};
use crate::error::{check_len, Result};
use crate::ilu::{bilu0_factorize, BiluFactors, PivotPolicy};
use crate::parallel::ROW_GRAIN;
use crate::scalar::Scalar;
use crate::sparse::{BlockCsrMatrix, BlockSparse};

/// Selects the first unknown of every cell block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PressureProjector {
    block_size: usize,
    cells: usize,
}

impl PressureProjector {
    pub fn new(block_size: usize, cells: usize) -> Self {
        Self { block_size, cells }
    }

    pub fn fine_size(&self) -> usize {
        self.block_size * self.cells
    }

    pub fn pressure_size(&self) -> usize {
        self.cells
    }

    pub fn pressure_indices(&self) -> Vec<usize> {
        (0..self.cells).map(|i| i * self.block_size).collect()
    }

    /// `Pi^T r`.
    pub fn restrict<T: Scalar>(&self, r: &[T]) -> Result<Vec<T>> {
        check_len("projector restrict", self.fine_size(), r.len())?;
        Ok(r.iter().step_by(self.block_size).copied().collect())
    }

    /// `Pi p`: pressure values in block slot 0, zeros elsewhere.
    pub fn prolong<T: Scalar>(&self, p: &[T]) -> Result<Vec<T>> {
        check_len("projector prolong", self.cells, p.len())?;
        let b = self.block_size;
        let mut out = vec![T::zero(); self.fine_size()];
        out.par_chunks_mut(b)
            .with_min_len(ROW_GRAIN)
            .zip(p.par_iter())
            .for_each(|(blk, &v)| blk[0] = v);
        Ok(out)
    }
}

/// Size check used to decide whether a cached preconditioner still fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub nrows: usize,
    pub nnz: usize,
}

impl Fingerprint {
    pub fn of<T: Scalar>(a: &BlockCsrMatrix<T>) -> Self {
        Self {
            nrows: a.dim(),
            nnz: a.nnz(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct CprParams {
    pub amg: AmgParams,
    pub pivot: PivotPolicy,
}

/// `B` with stages `B_P` (AMG on the pressure block) and `R` (BILU(0) on `A`).
#[derive(Debug, Clone)]
pub struct CprPreconditioner<T> {
    projector: PressureProjector,
    pressure_solver: AmgHierarchy<T>,
    relaxation: BiluFactors<T>,
    a: Arc<BlockCsrMatrix<T>>,
    fingerprint: Fingerprint,
}

/// Builds the pressure AMG and the global BILU(0) for `a`.
pub fn build_cpr<T: Scalar>(a: Arc<BlockCsrMatrix<T>>, params: &CprParams) -> Result<CprPreconditioner<T>> {
    let projector = PressureProjector::new(a.block_size(), a.block_rows());
    let app = a.component(0)?;
    let pressure_solver = build_hierarchy(&app, &params.amg)?;
    let relaxation = bilu0_factorize(a.as_ref(), params.pivot)?;
    Ok(CprPreconditioner {
        projector,
        pressure_solver,
        relaxation,
        fingerprint: Fingerprint::of(&a),
        a,
    })
}

impl<T: Scalar> CprPreconditioner<T> {
    pub fn projector(&self) -> &PressureProjector {
        &self.projector
    }

    pub fn pressure_solver(&self) -> &AmgHierarchy<T> {
        &self.pressure_solver
    }

    pub fn relaxation(&self) -> &BiluFactors<T> {
        &self.relaxation
    }

    pub fn matrix(&self) -> &Arc<BlockCsrMatrix<T>> {
        &self.a
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }

    /// `z = B r` from a zero initial guess.
    pub fn apply(&self, r: &[T]) -> Result<Vec<T>> {
        check_len("CPR apply", self.a.dim(), r.len())?;
        let cycle = self.pressure_solver.params().cycle;
        let rp = self.projector.restrict(r)?;
        let zp = self.pressure_solver.cycle(&rp, cycle)?;
        let mut z = self.projector.prolong(&zp)?;
        let r2 = self.a.residual(r, &z)?;
        let z2 = self.relaxation.apply(&r2)?;
        z.par_iter_mut()
            .with_min_len(ROW_GRAIN)
            .zip(z2.par_iter())
            .for_each(|(zi, &d)| *zi += d);
        Ok(z)
    }

    /// One stationary step on `a x = b` from the current `x`: pressure
    /// correction, fresh residual, then the BILU correction.
    pub fn richardson_step(&self, a: &BlockCsrMatrix<T>, b: &[T], x: &mut [T]) -> Result<()> {
        let cycle = self.pressure_solver.params().cycle;
        let r = a.residual(b, x)?;
        let zp = self.pressure_solver.cycle(&self.projector.restrict(&r)?, cycle)?;
        let z1 = self.projector.prolong(&zp)?;
        for (xi, d) in x.iter_mut().zip(&z1) {
            *xi += *d;
        }
        let r2 = a.residual(b, x)?;
        let z2 = self.relaxation.apply(&r2)?;
        for (xi, d) in x.iter_mut().zip(&z2) {
            *xi += *d;
        }
        Ok(())
    }
}

/// Free-function form of [`CprPreconditioner::apply`].
pub fn apply_cpr<T: Scalar>(b: &CprPreconditioner<T>, r: &[T]) -> Result<Vec<T>> {
    b.apply(r)
}

impl<T: Scalar> Preconditioner<T> for CprPreconditioner<T> {
    fn apply(&self, r: &[T]) -> Result<Vec<T>> {
        CprPreconditioner::apply(self, r)
    }
}
