//! Compressed sparse row storage in scalar and dense-block flavours.
//!
//! Both types keep the canonical form: strictly increasing column indices
//! within each row and no duplicate entries. Block values are stored
//! row-major and contiguous per block.

use rayon::prelude::*;

use crate::error::{check_len, Result, SolverError};
use crate::parallel::ROW_GRAIN;
use crate::scalar::Scalar;

/// Common read-only view over scalar and block CSR matrices.
///
/// A scalar matrix is a block matrix with block size one, so kernels written
/// against this trait serve both.
pub trait BlockSparse<T: Scalar>: Sync {
    fn block_size(&self) -> usize;
    /// Number of block rows.
    fn block_rows(&self) -> usize;
    /// Number of block columns.
    fn block_cols(&self) -> usize;
    fn row_ptr(&self) -> &[usize];
    fn col_idx(&self) -> &[usize];
    /// Block values, `block_size^2` entries per stored block.
    fn values(&self) -> &[T];

    /// Scalar row count.
    fn dim(&self) -> usize {
        self.block_rows() * self.block_size()
    }

    fn nnz_blocks(&self) -> usize {
        self.col_idx().len()
    }

    fn block(&self, k: usize) -> &[T] {
        let bb = self.block_size() * self.block_size();
        &self.values()[k * bb..(k + 1) * bb]
    }

    /// Position of the diagonal block in every block row.
    fn diagonal_positions(&self) -> Result<Vec<usize>> {
        let rp = self.row_ptr();
        let ci = self.col_idx();
        (0..self.block_rows())
            .map(|i| {
                ci[rp[i]..rp[i + 1]]
                    .binary_search(&i)
                    .map(|off| rp[i] + off)
                    .map_err(|_| SolverError::MissingDiagonal { row: i })
            })
            .collect()
    }

    /// `y = A x`, one block row per task. Each row sums in storage order.
    fn spmv_into(&self, x: &[T], y: &mut [T]) -> Result<()> {
        let b = self.block_size();
        check_len("spmv input", self.block_cols() * b, x.len())?;
        check_len("spmv output", self.block_rows() * b, y.len())?;
        let rp = self.row_ptr();
        let ci = self.col_idx();
        let vals = self.values();
        if b == 1 {
            y.par_iter_mut()
                .with_min_len(ROW_GRAIN)
                .enumerate()
                .for_each(|(i, yi)| {
                    let mut acc = T::zero();
                    for k in rp[i]..rp[i + 1] {
                        acc += vals[k] * x[ci[k]];
                    }
                    *yi = acc;
                });
        } else {
            let bb = b * b;
            y.par_chunks_mut(b)
                .with_min_len(ROW_GRAIN / b)
                .enumerate()
                .for_each(|(i, yi)| {
                    yi.iter_mut().for_each(|v| *v = T::zero());
                    for k in rp[i]..rp[i + 1] {
                        let blk = &vals[k * bb..(k + 1) * bb];
                        let xj = &x[ci[k] * b..(ci[k] + 1) * b];
                        for r in 0..b {
                            let mut acc = yi[r];
                            for c in 0..b {
                                acc += blk[r * b + c] * xj[c];
                            }
                            yi[r] = acc;
                        }
                    }
                });
        }
        Ok(())
    }

    fn spmv(&self, x: &[T]) -> Result<Vec<T>> {
        let mut y = vec![T::zero(); self.dim()];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    /// `r = b - A x`.
    fn residual(&self, rhs: &[T], x: &[T]) -> Result<Vec<T>> {
        check_len("residual rhs", self.dim(), rhs.len())?;
        let mut r = self.spmv(x)?;
        r.par_iter_mut()
            .with_min_len(ROW_GRAIN)
            .zip(rhs.par_iter())
            .for_each(|(ri, &bi)| *ri = bi - *ri);
        Ok(r)
    }
}

fn validate_structure(
    nrows: usize,
    ncols: usize,
    row_ptr: &[usize],
    col_idx: &[usize],
    nvalues: usize,
    per_entry: usize,
) -> Result<()> {
    if row_ptr.len() != nrows + 1 {
        return Err(SolverError::InvalidMatrix(format!(
            "row_ptr has length {}, expected {}",
            row_ptr.len(),
            nrows + 1
        )));
    }
    if row_ptr[0] != 0 || row_ptr[nrows] != col_idx.len() {
        return Err(SolverError::InvalidMatrix(
            "row_ptr must start at 0 and end at nnz".into(),
        ));
    }
    if nvalues != col_idx.len() * per_entry {
        return Err(SolverError::InvalidMatrix(format!(
            "expected {} values, found {}",
            col_idx.len() * per_entry,
            nvalues
        )));
    }
    for i in 0..nrows {
        if row_ptr[i] > row_ptr[i + 1] {
            return Err(SolverError::InvalidMatrix(format!(
                "row_ptr decreases at row {i}"
            )));
        }
        let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
        for w in cols.windows(2) {
            if w[0] >= w[1] {
                return Err(SolverError::InvalidMatrix(format!(
                    "row {i}: columns not strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        if let Some(&last) = cols.last() {
            if last >= ncols {
                return Err(SolverError::InvalidMatrix(format!(
                    "row {i}: column {last} out of range"
                )));
            }
        }
    }
    Ok(())
}

/// Sorts triplets by (row, col) and merges duplicates with `merge`.
/// Returns an error if `merge` refuses a duplicate.
fn assemble<V, F>(
    nrows: usize,
    ncols: usize,
    mut entries: Vec<(usize, usize, V)>,
    mut merge: F,
) -> Result<(Vec<usize>, Vec<usize>, Vec<V>)>
where
    F: FnMut(&mut V, V, usize, usize) -> Result<()>,
{
    for &(i, j, _) in &entries {
        if i >= nrows || j >= ncols {
            return Err(SolverError::InvalidMatrix(format!(
                "entry ({i}, {j}) outside {nrows}x{ncols}"
            )));
        }
    }
    entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut row_ptr = vec![0usize; nrows + 1];
    let mut col_idx = Vec::with_capacity(entries.len());
    let mut vals: Vec<V> = Vec::with_capacity(entries.len());
    let mut last: Option<(usize, usize)> = None;
    for (i, j, v) in entries {
        if last == Some((i, j)) {
            merge(vals.last_mut().unwrap(), v, i, j)?;
            continue;
        }
        row_ptr[i + 1] += 1;
        col_idx.push(j);
        vals.push(v);
        last = Some((i, j));
    }
    for i in 0..nrows {
        row_ptr[i + 1] += row_ptr[i];
    }
    Ok((row_ptr, col_idx, vals))
}

/// Scalar CSR matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Builds a matrix from raw arrays, rejecting anything not in canonical form.
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<T>,
    ) -> Result<Self> {
        validate_structure(nrows, ncols, &row_ptr, &col_idx, values.len(), 1)?;
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Builds from coordinate triplets; duplicate coordinates are an error.
    pub fn from_triplets(nrows: usize, ncols: usize, entries: Vec<(usize, usize, T)>) -> Result<Self> {
        let (row_ptr, col_idx, values) = assemble(nrows, ncols, entries, |_, _, i, j| {
            Err(SolverError::InvalidMatrix(format!("duplicate entry ({i}, {j})")))
        })?;
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Builds from coordinate triplets, summing duplicates in input order.
    pub fn from_triplets_summed(
        nrows: usize,
        ncols: usize,
        entries: Vec<(usize, usize, T)>,
    ) -> Result<Self> {
        let (row_ptr, col_idx, values) = assemble(nrows, ncols, entries, |acc, v, _, _| {
            *acc += v;
            Ok(())
        })?;
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![T::one(); n])
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    /// Keeps every entry of a row-major dense matrix that is not exactly zero,
    /// plus the diagonal of square matrices.
    pub fn from_dense(nrows: usize, ncols: usize, dense: &[T]) -> Result<Self> {
        check_len("dense matrix", nrows * ncols, dense.len())?;
        let mut entries = Vec::new();
        for i in 0..nrows {
            for j in 0..ncols {
                let v = dense[i * ncols + j];
                if v != T::zero() || (i == j && nrows == ncols) {
                    entries.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, entries)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> Option<T> {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).ok().map(|k| vals[k])
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.col_idx[k], self.values[k]))
        })
    }

    pub fn to_dense(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.nrows * self.ncols];
        for (i, j, v) in self.triplets() {
            d[i * self.ncols + j] = v;
        }
        d
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![T::zero(); self.nnz()];
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let dst = next[j];
                col_idx[dst] = i;
                values[dst] = self.values[k];
                next[j] += 1;
            }
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Symmetric permutation `P A P^T` where `order[new] = old`.
    pub fn permute_symmetric(&self, order: &[usize]) -> Result<Self> {
        check_len("permutation", self.nrows, order.len())?;
        if !self.is_square() {
            return Err(SolverError::InvalidMatrix("permutation of non-square matrix".into()));
        }
        let mut new_of = vec![usize::MAX; self.nrows];
        for (new, &old) in order.iter().enumerate() {
            if old >= self.nrows || new_of[old] != usize::MAX {
                return Err(SolverError::InvalidParameter(
                    "order is not a permutation".into(),
                ));
            }
            new_of[old] = new;
        }
        let entries = self
            .triplets()
            .map(|(i, j, v)| (new_of[i], new_of[j], v))
            .collect();
        Self::from_triplets(self.nrows, self.ncols, entries)
    }

    /// Principal submatrix `A[idx, idx]`, rows and columns in the order given.
    pub fn principal_submatrix(&self, idx: &[usize]) -> Result<Self> {
        let mut local = vec![usize::MAX; self.ncols];
        for (p, &g) in idx.iter().enumerate() {
            local[g] = p;
        }
        let mut entries = Vec::new();
        for (p, &g) in idx.iter().enumerate() {
            let (cols, vals) = self.row(g);
            for (&j, &v) in cols.iter().zip(vals) {
                if local[j] != usize::MAX {
                    entries.push((p, local[j], v));
                }
            }
        }
        Self::from_triplets(idx.len(), idx.len(), entries)
    }

    /// Exact structural and numerical symmetry up to `tol * max|a_ij|`.
    pub fn is_symmetric(&self, tol: T) -> bool {
        if !self.is_square() {
            return false;
        }
        let t = self.transpose();
        if t.row_ptr != self.row_ptr || t.col_idx != self.col_idx {
            return false;
        }
        let scale = self
            .values
            .iter()
            .fold(T::zero(), |m, v| m.max(v.abs()));
        self.values
            .iter()
            .zip(&t.values)
            .all(|(a, b)| (*a - *b).abs() <= tol * scale)
    }

    /// Sparse product `self * other` (row-by-row accumulation).
    pub fn matmul(&self, other: &CsrMatrix<T>) -> Result<Self> {
        check_len("matmul inner dimension", self.ncols, other.nrows)?;
        let mut acc = vec![T::zero(); other.ncols];
        let mut used = vec![false; other.ncols];
        let mut cols = Vec::new();
        let mut row_ptr = vec![0usize];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let a = self.values[k];
                let r = self.col_idx[k];
                for p in other.row_ptr[r]..other.row_ptr[r + 1] {
                    let j = other.col_idx[p];
                    if !used[j] {
                        used[j] = true;
                        cols.push(j);
                    }
                    acc[j] += a * other.values[p];
                }
            }
            cols.sort_unstable();
            for &j in &cols {
                col_idx.push(j);
                values.push(acc[j]);
                acc[j] = T::zero();
                used[j] = false;
            }
            cols.clear();
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            nrows: self.nrows,
            ncols: other.ncols,
            row_ptr,
            col_idx,
            values,
        })
    }
}

impl<T: Scalar> BlockSparse<T> for CsrMatrix<T> {
    fn block_size(&self) -> usize {
        1
    }
    fn block_rows(&self) -> usize {
        self.nrows
    }
    fn block_cols(&self) -> usize {
        self.ncols
    }
    fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }
    fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }
    fn values(&self) -> &[T] {
        &self.values
    }
}

/// CSR matrix of dense `b x b` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCsrMatrix<T> {
    block_size: usize,
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> BlockCsrMatrix<T> {
    pub fn new(
        block_size: usize,
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<T>,
    ) -> Result<Self> {
        if block_size == 0 {
            return Err(SolverError::InvalidParameter("block size must be at least 1".into()));
        }
        validate_structure(nrows, ncols, &row_ptr, &col_idx, values.len(), block_size * block_size)?;
        Ok(Self {
            block_size,
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Builds from `(block_row, block_col, block)` triplets, summing duplicates.
    pub fn from_block_triplets(
        block_size: usize,
        nrows: usize,
        ncols: usize,
        entries: Vec<(usize, usize, Vec<T>)>,
    ) -> Result<Self> {
        let bb = block_size * block_size;
        if block_size == 0 {
            return Err(SolverError::InvalidParameter("block size must be at least 1".into()));
        }
        if let Some(bad) = entries.iter().find(|e| e.2.len() != bb) {
            return Err(SolverError::InvalidMatrix(format!(
                "block ({}, {}) has {} values, expected {bb}",
                bad.0,
                bad.1,
                bad.2.len()
            )));
        }
        let (row_ptr, col_idx, blocks) = assemble(nrows, ncols, entries, |acc, v, _, _| {
            acc.iter_mut().zip(v).for_each(|(a, b)| *a += b);
            Ok(())
        })?;
        Ok(Self {
            block_size,
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values: blocks.into_iter().flatten().collect(),
        })
    }

    /// Wraps a scalar matrix as a block matrix with block size one.
    pub fn from_csr(a: &CsrMatrix<T>) -> Self {
        Self {
            block_size: 1,
            nrows: a.nrows,
            ncols: a.ncols,
            row_ptr: a.row_ptr.clone(),
            col_idx: a.col_idx.clone(),
            values: a.values.clone(),
        }
    }

    /// Groups a scalar matrix into `b x b` blocks. Positions inside a touched
    /// block that the scalar matrix lacks become explicit zeros.
    pub fn from_scalar(a: &CsrMatrix<T>, block_size: usize) -> Result<Self> {
        if block_size == 0 || a.nrows % block_size != 0 || a.ncols % block_size != 0 {
            return Err(SolverError::InvalidParameter(format!(
                "block size {block_size} does not divide {}x{}",
                a.nrows, a.ncols
            )));
        }
        let b = block_size;
        let bb = b * b;
        let entries = a
            .triplets()
            .map(|(i, j, v)| {
                let mut blk = vec![T::zero(); bb];
                blk[(i % b) * b + (j % b)] = v;
                (i / b, j / b, blk)
            })
            .collect();
        Self::from_block_triplets(b, a.nrows / b, a.ncols / b, entries)
    }

    /// Expands to the scalar `b*n` system, keeping every stored block entry
    /// (including zeros inside blocks) so the block pattern survives.
    pub fn to_scalar(&self) -> CsrMatrix<T> {
        let b = self.block_size;
        let bb = b * b;
        let mut row_ptr = vec![0usize; self.nrows * b + 1];
        let mut col_idx = Vec::with_capacity(self.values.len());
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.nrows {
            for r in 0..b {
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    let j = self.col_idx[k];
                    for c in 0..b {
                        col_idx.push(j * b + c);
                        values.push(self.values[k * bb + r * b + c]);
                    }
                }
                row_ptr[i * b + r + 1] = col_idx.len();
            }
        }
        CsrMatrix {
            nrows: self.nrows * b,
            ncols: self.ncols * b,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Scalar matrix of block Frobenius norms on the block pattern.
    pub fn block_norms(&self) -> CsrMatrix<T> {
        let bb = self.block_size * self.block_size;
        let values = self
            .values
            .chunks(bb)
            .map(|blk| blk.iter().map(|v| *v * *v).sum::<T>().sqrt())
            .collect();
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values,
        }
    }

    /// Scalar matrix of entry `(offset, offset)` of every block. Off-diagonal
    /// zeros are dropped; the diagonal is always kept.
    pub fn component(&self, offset: usize) -> Result<CsrMatrix<T>> {
        let b = self.block_size;
        if offset >= b {
            return Err(SolverError::InvalidParameter(format!(
                "component {offset} outside block size {b}"
            )));
        }
        let bb = b * b;
        let mut entries = Vec::with_capacity(self.col_idx.len());
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let v = self.values[k * bb + offset * b + offset];
                if v != T::zero() || i == j {
                    entries.push((i, j, v));
                }
            }
        }
        CsrMatrix::from_triplets(self.nrows, self.ncols, entries)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Stored scalar entries (`blocks * b^2`).
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Block at `(i, j)` if it is in the pattern.
    pub fn get_block(&self, i: usize, j: usize) -> Option<&[T]> {
        let cols = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        cols.binary_search(&j)
            .ok()
            .map(|off| self.block(self.row_ptr[i] + off))
    }
}

impl<T: Scalar> BlockSparse<T> for BlockCsrMatrix<T> {
    fn block_size(&self) -> usize {
        self.block_size
    }
    fn block_rows(&self) -> usize {
        self.nrows
    }
    fn block_cols(&self) -> usize {
        self.ncols
    }
    fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }
    fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }
    fn values(&self) -> &[T] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> CsrMatrix<f64> {
        let mut e = Vec::new();
        for i in 0..n {
            e.push((i, i, 2.0));
            if i > 0 {
                e.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                e.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, e).unwrap()
    }

    #[test]
    fn identity_spmv() {
        let a = CsrMatrix::<f64>::identity(3);
        assert_eq!(a.spmv(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn empty_pattern_spmv_is_zero() {
        let a = CsrMatrix::<f64>::new(3, 3, vec![0; 4], vec![], vec![]).unwrap();
        assert_eq!(a.spmv(&[4.0, -1.0, 7.0]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn two_by_two_spmv() {
        let a = tridiag(2);
        assert_eq!(a.spmv(&[1.0, 1.0]).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn spmv_dimension_mismatch() {
        let a = tridiag(3);
        assert!(matches!(
            a.spmv(&[1.0, 1.0]),
            Err(SolverError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_unsorted_and_duplicate_columns() {
        assert!(CsrMatrix::<f64>::new(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::<f64>::new(1, 3, vec![0, 2], vec![1, 1], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 0, 2.0)]).is_err());
    }

    #[test]
    fn summed_triplets_merge() {
        let a = CsrMatrix::from_triplets_summed(2, 2, vec![(0, 0, 1.0), (1, 0, 3.0), (0, 0, 2.0)])
            .unwrap();
        assert_eq!(a.get(0, 0), Some(3.0));
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn block_round_trip_through_scalar() {
        let entries = vec![
            (0, 0, vec![4.0, 1.0, 0.0, 3.0]),
            (0, 1, vec![-1.0, 0.0, 0.0, -1.0]),
            (1, 1, vec![5.0, 0.0, 2.0, 6.0]),
        ];
        let a = BlockCsrMatrix::from_block_triplets(2, 2, 2, entries).unwrap();
        let s = a.to_scalar();
        assert_eq!(s.nrows(), 4);
        let back = BlockCsrMatrix::from_scalar(&s, 2).unwrap();
        assert_eq!(back, a);
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(a.spmv(&x).unwrap(), s.spmv(&x).unwrap());
    }

    #[test]
    fn component_extracts_pressure_entries() {
        let entries = vec![
            (0, 0, vec![4.0, 1.0, 1.0, 3.0]),
            (0, 1, vec![-2.0, 0.0, 0.0, -1.0]),
            (1, 0, vec![0.0, 1.0, 0.0, 0.0]),
            (1, 1, vec![5.0, 0.0, 2.0, 6.0]),
        ];
        let a = BlockCsrMatrix::from_block_triplets(2, 2, 2, entries).unwrap();
        let p = a.component(0).unwrap();
        assert_eq!(p.to_dense(), vec![4.0, -2.0, 0.0, 5.0]);
        assert_eq!(p.nnz(), 3);
    }

    #[test]
    fn transpose_and_permute() {
        let a = CsrMatrix::from_triplets(2, 3, vec![(0, 2, 1.0), (1, 0, 2.0)]).unwrap();
        let t = a.transpose();
        assert_eq!(t.get(2, 0), Some(1.0));
        assert_eq!(t.get(0, 1), Some(2.0));
        let m = tridiag(3);
        let p = m.permute_symmetric(&[2, 0, 1]).unwrap();
        // new 0 = old 2, new 1 = old 0
        assert_eq!(p.get(0, 0), Some(2.0));
        assert_eq!(p.get(0, 2), Some(-1.0));
        assert_eq!(p.get(0, 1), None);
    }
}
