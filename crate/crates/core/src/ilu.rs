//! Block ILU(0) and level-scheduled triangular solves.
//!
//! The factorization keeps exactly the block pattern of `A`. Triangular
//! solves are layered by dependency depth; rows of one layer are independent
//! and run in parallel, so the solve reproduces the sequential substitution
//! bit for bit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result, SolverError};
use crate::scalar::Scalar;
use crate::smoothers::MAX_BLOCK;
use crate::sparse::{BlockCsrMatrix, BlockDiagFactors, BlockSparse, DenseLu};

/// What to do when a pivot block turns out singular.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PivotPolicy {
    /// Shift the block diagonal by `1e-8 * ||block||_F` and record a warning.
    #[default]
    Perturb,
    /// Fail with [`SolverError::SingularPivot`].
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Triangle {
    Lower,
    Upper,
}

/// Rows grouped by dependency depth of a triangular factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSchedule {
    pub levels: Vec<Vec<usize>>,
}

impl LevelSchedule {
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }
}

/// Longest-path layering of the strictly triangular part of `t`'s pattern.
/// Entries on the other side of the diagonal are ignored.
pub fn level_schedule<T: Scalar, M: BlockSparse<T>>(t: &M, triangle: Triangle) -> LevelSchedule {
    let n = t.block_rows();
    let rp = t.row_ptr();
    let ci = t.col_idx();
    let mut level = vec![0usize; n];
    let mut levels: Vec<Vec<usize>> = Vec::new();
    let place = |i: usize, lvl: usize, levels: &mut Vec<Vec<usize>>| {
        if levels.len() <= lvl {
            levels.resize(lvl + 1, Vec::new());
        }
        levels[lvl].push(i);
    };
    match triangle {
        Triangle::Lower => {
            for i in 0..n {
                let lvl = (rp[i]..rp[i + 1])
                    .filter(|&k| ci[k] < i)
                    .map(|k| level[ci[k]] + 1)
                    .max()
                    .unwrap_or(0);
                level[i] = lvl;
                place(i, lvl, &mut levels);
            }
        }
        Triangle::Upper => {
            for i in (0..n).rev() {
                let lvl = (rp[i]..rp[i + 1])
                    .filter(|&k| ci[k] > i)
                    .map(|k| level[ci[k]] + 1)
                    .max()
                    .unwrap_or(0);
                level[i] = lvl;
                place(i, lvl, &mut levels);
            }
        }
    }
    LevelSchedule { levels }
}

/// Pivot shift applied during factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotWarning {
    pub row: usize,
    pub shift: f64,
}

#[derive(Debug, Clone)]
pub struct BiluFactors<T> {
    /// Unit lower factor; identity diagonal blocks are stored explicitly.
    lower: BlockCsrMatrix<T>,
    /// Upper factor including the diagonal blocks.
    upper: BlockCsrMatrix<T>,
    upper_diag: BlockDiagFactors<T>,
    lower_levels: LevelSchedule,
    upper_levels: LevelSchedule,
    warnings: Vec<PivotWarning>,
}

fn block_mul<T: Scalar>(b: usize, x: &[T], y: &[T], out: &mut [T]) {
    for r in 0..b {
        for c in 0..b {
            let mut acc = T::zero();
            for k in 0..b {
                acc += x[r * b + k] * y[k * b + c];
            }
            out[r * b + c] = acc;
        }
    }
}

/// ILU(0) on the block pattern of `a` (row-oriented IKJ elimination).
pub fn bilu0_factorize<T, M>(a: &M, policy: PivotPolicy) -> Result<BiluFactors<T>>
where
    T: Scalar,
    M: BlockSparse<T>,
{
    let n = a.block_rows();
    let b = a.block_size();
    if b > MAX_BLOCK {
        return Err(SolverError::InvalidParameter(format!("block size {b} exceeds {MAX_BLOCK}")));
    }
    if n != a.block_cols() {
        return Err(SolverError::InvalidMatrix("ILU needs a square matrix".into()));
    }
    let bb = b * b;
    let rp = a.row_ptr();
    let ci = a.col_idx();
    let diag_pos = a.diagonal_positions()?;
    let mut w = a.values().to_vec();
    let mut inv_diag = vec![T::zero(); n * bb];
    let mut marker = vec![usize::MAX; n];
    let mut lik = vec![T::zero(); bb];
    let mut prod = vec![T::zero(); bb];
    let mut warnings = Vec::new();

    for i in 0..n {
        for k in rp[i]..rp[i + 1] {
            marker[ci[k]] = k;
        }
        for kk in rp[i]..diag_pos[i] {
            let kcol = ci[kk];
            block_mul(b, &w[kk * bb..(kk + 1) * bb], &inv_diag[kcol * bb..(kcol + 1) * bb], &mut lik);
            w[kk * bb..(kk + 1) * bb].copy_from_slice(&lik);
            for p in diag_pos[kcol] + 1..rp[kcol + 1] {
                let m = marker[ci[p]];
                if m == usize::MAX {
                    continue;
                }
                block_mul(b, &lik, &w[p * bb..(p + 1) * bb], &mut prod);
                for (dst, v) in w[m * bb..(m + 1) * bb].iter_mut().zip(&prod) {
                    *dst -= *v;
                }
            }
        }
        let d = diag_pos[i];
        let blk = &mut w[d * bb..(d + 1) * bb];
        let lu = match DenseLu::factor(b, blk) {
            Some(lu) => lu,
            None => match policy {
                PivotPolicy::Error => return Err(SolverError::SingularPivot { row: i }),
                PivotPolicy::Perturb => {
                    let norm = blk.iter().map(|v| *v * *v).sum::<T>().sqrt();
                    let shift = if norm > T::zero() && norm.is_finite() {
                        T::lit(1e-8) * norm
                    } else {
                        T::lit(1e-8)
                    };
                    for r in 0..b {
                        blk[r * b + r] += shift;
                    }
                    log::warn!("BILU pivot block at row {i} singular; shifted diagonal by {shift:e}");
                    warnings.push(PivotWarning {
                        row: i,
                        shift: shift.as_f64(),
                    });
                    DenseLu::factor(b, blk).ok_or(SolverError::SingularPivot { row: i })?
                }
            },
        };
        inv_diag[i * bb..(i + 1) * bb].copy_from_slice(&lu.inverse());
        for k in rp[i]..rp[i + 1] {
            marker[ci[k]] = usize::MAX;
        }
    }

    let mut identity = vec![T::zero(); bb];
    for r in 0..b {
        identity[r * b + r] = T::one();
    }
    let (mut l_ptr, mut l_idx, mut l_val) = (vec![0usize], Vec::new(), Vec::new());
    let (mut u_ptr, mut u_idx, mut u_val) = (vec![0usize], Vec::new(), Vec::new());
    for i in 0..n {
        for k in rp[i]..diag_pos[i] {
            l_idx.push(ci[k]);
            l_val.extend_from_slice(&w[k * bb..(k + 1) * bb]);
        }
        l_idx.push(i);
        l_val.extend_from_slice(&identity);
        l_ptr.push(l_idx.len());
        for k in diag_pos[i]..rp[i + 1] {
            u_idx.push(ci[k]);
            u_val.extend_from_slice(&w[k * bb..(k + 1) * bb]);
        }
        u_ptr.push(u_idx.len());
    }
    let lower = BlockCsrMatrix::new(b, n, n, l_ptr, l_idx, l_val)?;
    let upper = BlockCsrMatrix::new(b, n, n, u_ptr, u_idx, u_val)?;
    let upper_diag = BlockDiagFactors::factor(b, (0..n).map(|i| upper.block(upper.row_ptr()[i])))
        .map_err(|row| SolverError::SingularPivot { row })?;
    let lower_levels = level_schedule(&lower, Triangle::Lower);
    let upper_levels = level_schedule(&upper, Triangle::Upper);
    Ok(BiluFactors {
        lower,
        upper,
        upper_diag,
        lower_levels,
        upper_levels,
        warnings,
    })
}

impl<T: Scalar> BiluFactors<T> {
    pub fn lower(&self) -> &BlockCsrMatrix<T> {
        &self.lower
    }

    pub fn upper(&self) -> &BlockCsrMatrix<T> {
        &self.upper
    }

    pub fn lower_levels(&self) -> &LevelSchedule {
        &self.lower_levels
    }

    pub fn upper_levels(&self) -> &LevelSchedule {
        &self.upper_levels
    }

    pub fn warnings(&self) -> &[PivotWarning] {
        &self.warnings
    }

    pub fn block_size(&self) -> usize {
        self.lower.block_size()
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    #[inline]
    fn forward_row(&self, i: usize, r: &[T], y: &[T], out: &mut [T]) {
        let b = self.block_size();
        let bb = b * b;
        let l = &self.lower;
        let (rp, ci, vals) = (l.row_ptr(), l.col_idx(), l.values());
        out[..b].copy_from_slice(&r[i * b..(i + 1) * b]);
        // last entry of each row is the unit diagonal
        for k in rp[i]..rp[i + 1] - 1 {
            let j = ci[k];
            let blk = &vals[k * bb..(k + 1) * bb];
            for rr in 0..b {
                let mut acc = out[rr];
                for c in 0..b {
                    acc -= blk[rr * b + c] * y[j * b + c];
                }
                out[rr] = acc;
            }
        }
    }

    #[inline]
    fn backward_row(&self, i: usize, y: &[T], z: &[T], out: &mut [T]) {
        let b = self.block_size();
        let bb = b * b;
        let u = &self.upper;
        let (rp, ci, vals) = (u.row_ptr(), u.col_idx(), u.values());
        out[..b].copy_from_slice(&y[i * b..(i + 1) * b]);
        // first entry of each row is the diagonal
        for k in rp[i] + 1..rp[i + 1] {
            let j = ci[k];
            let blk = &vals[k * bb..(k + 1) * bb];
            for rr in 0..b {
                let mut acc = out[rr];
                for c in 0..b {
                    acc -= blk[rr * b + c] * z[j * b + c];
                }
                out[rr] = acc;
            }
        }
        self.upper_diag.solve(i, &mut out[..b]);
    }

    fn run_levels<F>(&self, schedule: &LevelSchedule, x: &mut [T], row: F)
    where
        F: Fn(usize, &[T], &mut [T]) + Sync,
    {
        let b = self.block_size();
        let mut updates: Vec<T> = Vec::new();
        for level in &schedule.levels {
            updates.clear();
            updates.resize(level.len() * b, T::zero());
            {
                let xs: &[T] = x;
                updates
                    .par_chunks_mut(b)
                    .with_min_len(64)
                    .zip(level.par_iter())
                    .for_each(|(out, &i)| row(i, xs, out));
            }
            for (p, &i) in level.iter().enumerate() {
                x[i * b..(i + 1) * b].copy_from_slice(&updates[p * b..(p + 1) * b]);
            }
        }
    }

    /// `z = U^{-1} L^{-1} r`, level-parallel.
    pub fn apply(&self, r: &[T]) -> Result<Vec<T>> {
        check_len("BILU apply", self.dim(), r.len())?;
        let mut y = vec![T::zero(); r.len()];
        self.run_levels(&self.lower_levels, &mut y, |i, ys, out| self.forward_row(i, r, ys, out));
        let mut z = vec![T::zero(); r.len()];
        let ys = y;
        self.run_levels(&self.upper_levels, &mut z, |i, zs, out| self.backward_row(i, &ys, zs, out));
        Ok(z)
    }

    /// Plain sequential substitution, for reference.
    pub fn apply_sequential(&self, r: &[T]) -> Result<Vec<T>> {
        check_len("BILU apply", self.dim(), r.len())?;
        let b = self.block_size();
        let n = self.lower.block_rows();
        let mut buf = [T::zero(); MAX_BLOCK];
        let mut y = vec![T::zero(); r.len()];
        for i in 0..n {
            self.forward_row(i, r, &y, &mut buf);
            y[i * b..(i + 1) * b].copy_from_slice(&buf[..b]);
        }
        let mut z = vec![T::zero(); r.len()];
        for i in (0..n).rev() {
            self.backward_row(i, &y, &z, &mut buf);
            z[i * b..(i + 1) * b].copy_from_slice(&buf[..b]);
        }
        Ok(z)
    }
}

/// Largest `|(LU)_ij - a_ij|` over the stored entries of `a`, relative to
/// `max |a_ij|`.
pub fn pattern_reconstruction_error<T: Scalar, M: BlockSparse<T>>(a: &M, f: &BiluFactors<T>) -> T {
    let l = f.lower().to_scalar();
    let u = f.upper().to_scalar();
    let b = a.block_size();
    let bb = b * b;
    let (rp, ci, vals) = (a.row_ptr(), a.col_idx(), a.values());
    let scale = vals.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let mut worst = T::zero();
    for bi in 0..a.block_rows() {
        for k in rp[bi]..rp[bi + 1] {
            let bj = ci[k];
            for r in 0..b {
                for c in 0..b {
                    let (i, j) = (bi * b + r, bj * b + c);
                    let (lc, lv) = l.row(i);
                    let lu = lc
                        .iter()
                        .zip(lv)
                        .map(|(&p, &lip)| lip * u.get(p, j).unwrap_or_else(T::zero))
                        .fold(T::zero(), |s, v| s + v);
                    worst = worst.max((lu - vals[k * bb + r * b + c]).abs());
                }
            }
        }
    }
    if scale > T::zero() {
        worst / scale
    } else {
        worst
    }
}

/// Free-function form of [`BiluFactors::apply`].
pub fn bilu_apply<T: Scalar>(f: &BiluFactors<T>, r: &[T]) -> Result<Vec<T>> {
    f.apply(r)
}
