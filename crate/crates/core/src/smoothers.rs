//! Gauss-Seidel sweeps: sequential, natural-ordering parallel (PGS-NO) and
//! multi-color parallel over strong-connection groups (PGS-SCM).
//!
//! Every variant computes a row update the same way, subtracting the stored
//! off-diagonal products from the right-hand side in column order and then
//! solving with the diagonal block. Variants differ only in which value of a
//! neighbour they read.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coloring::ColorPartition;
use crate::error::{check_len, Result, SolverError};
use crate::parallel::{current_workers, with_workers};
use crate::scalar::Scalar;
use crate::sparse::{BlockDiagFactors, BlockSparse};

/// Largest supported block size for the smoothing kernels.
pub const MAX_BLOCK: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SmootherKind {
    ClassicGs,
    PgsNo,
    #[default]
    PgsScm,
}

impl std::fmt::Display for SmootherKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SmootherKind::ClassicGs => "classic-gs",
            SmootherKind::PgsNo => "pgs-no",
            SmootherKind::PgsScm => "pgs-scm",
        })
    }
}

impl std::str::FromStr for SmootherKind {
    type Err = SolverError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "classic-gs" | "gs" | "classic" => Ok(Self::ClassicGs),
            "pgs-no" => Ok(Self::PgsNo),
            "pgs-scm" => Ok(Self::PgsScm),
            other => Err(SolverError::InvalidParameter(format!("unknown smoother {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SweepDirection {
    #[default]
    Forward,
    Backward,
    /// Forward then backward.
    Symmetric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmootherSpec {
    pub kind: SmootherKind,
    pub sweeps: usize,
    pub direction: SweepDirection,
    /// Required for [`SmootherKind::PgsScm`].
    pub partition: Option<ColorPartition>,
}

impl SmootherSpec {
    pub fn classic(direction: SweepDirection) -> Self {
        Self {
            kind: SmootherKind::ClassicGs,
            sweeps: 1,
            direction,
            partition: None,
        }
    }

    pub fn natural_parallel(direction: SweepDirection) -> Self {
        Self {
            kind: SmootherKind::PgsNo,
            ..Self::classic(direction)
        }
    }

    pub fn multicolor(partition: ColorPartition, direction: SweepDirection) -> Self {
        Self {
            kind: SmootherKind::PgsScm,
            partition: Some(partition),
            ..Self::classic(direction)
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.sweeps == 0 {
            return Err(SolverError::InvalidParameter("sweeps must be at least 1".into()));
        }
        if self.kind == SmootherKind::PgsScm {
            let p = self.partition.as_ref().ok_or_else(|| {
                SolverError::InvalidParameter("PGS-SCM needs a color partition".into())
            })?;
            check_len("color partition", n, p.num_vertices())?;
        }
        Ok(())
    }
}

/// Diagonal-block factors and positions prepared once per matrix.
#[derive(Debug, Clone)]
pub struct GaussSeidel<T> {
    block_size: usize,
    n: usize,
    diag_pos: Vec<usize>,
    diag: BlockDiagFactors<T>,
}

impl<T: Scalar> GaussSeidel<T> {
    pub fn new<M: BlockSparse<T>>(a: &M) -> Result<Self> {
        let b = a.block_size();
        if b > MAX_BLOCK {
            return Err(SolverError::InvalidParameter(format!(
                "block size {b} exceeds {MAX_BLOCK}"
            )));
        }
        if a.block_rows() != a.block_cols() {
            return Err(SolverError::InvalidMatrix("Gauss-Seidel needs a square matrix".into()));
        }
        let diag_pos = a.diagonal_positions()?;
        let diag = BlockDiagFactors::factor(b, diag_pos.iter().map(|&k| a.block(k)))
            .map_err(|row| SolverError::SingularDiagonal { row })?;
        Ok(Self {
            block_size: b,
            n: a.block_rows(),
            diag_pos,
            diag,
        })
    }

    /// New value of block row `i` given a reader for the current iterate.
    #[inline]
    fn row_update<M, F>(&self, a: &M, rhs: &[T], i: usize, read: F, out: &mut [T])
    where
        M: BlockSparse<T>,
        F: Fn(usize) -> T,
    {
        let b = self.block_size;
        let rp = a.row_ptr();
        let ci = a.col_idx();
        let vals = a.values();
        let dk = self.diag_pos[i];
        if b == 1 {
            let mut acc = rhs[i];
            for k in rp[i]..rp[i + 1] {
                if k != dk {
                    acc -= vals[k] * read(ci[k]);
                }
            }
            out[0] = acc;
        } else {
            let bb = b * b;
            out[..b].copy_from_slice(&rhs[i * b..(i + 1) * b]);
            for k in rp[i]..rp[i + 1] {
                if k == dk {
                    continue;
                }
                let j = ci[k];
                let blk = &vals[k * bb..(k + 1) * bb];
                for r in 0..b {
                    let mut acc = out[r];
                    for c in 0..b {
                        acc -= blk[r * b + c] * read(j * b + c);
                    }
                    out[r] = acc;
                }
            }
        }
        self.diag.solve(i, &mut out[..b]);
    }

    fn check<M: BlockSparse<T>>(&self, a: &M, rhs: &[T], x: &[T]) -> Result<()> {
        check_len("smoother matrix", self.n, a.block_rows())?;
        check_len("smoother rhs", a.dim(), rhs.len())?;
        check_len("smoother iterate", a.dim(), x.len())
    }

    /// Sequential sweep visiting block rows in `order`.
    pub fn sweep_in_order<M: BlockSparse<T>>(
        &self,
        a: &M,
        rhs: &[T],
        x: &mut [T],
        order: &[usize],
    ) -> Result<()> {
        self.check(a, rhs, x)?;
        let b = self.block_size;
        let mut buf = [T::zero(); MAX_BLOCK];
        for &i in order {
            self.row_update(a, rhs, i, |j| x[j], &mut buf);
            x[i * b..(i + 1) * b].copy_from_slice(&buf[..b]);
        }
        Ok(())
    }

    /// Classic Gauss-Seidel in natural (or reversed) order.
    pub fn classic<M: BlockSparse<T>>(
        &self,
        a: &M,
        rhs: &[T],
        x: &mut [T],
        direction: SweepDirection,
    ) -> Result<()> {
        let fwd: Vec<usize> = (0..self.n).collect();
        let bwd: Vec<usize> = (0..self.n).rev().collect();
        match direction {
            SweepDirection::Forward => self.sweep_in_order(a, rhs, x, &fwd),
            SweepDirection::Backward => self.sweep_in_order(a, rhs, x, &bwd),
            SweepDirection::Symmetric => {
                self.sweep_in_order(a, rhs, x, &fwd)?;
                self.sweep_in_order(a, rhs, x, &bwd)
            }
        }
    }

    /// Natural-ordering parallel sweep. Rows are cut into one contiguous
    /// chunk per worker of the current pool and each chunk is swept
    /// sequentially while the others run; reads of rows owned by another
    /// chunk see whatever value is current. The result therefore depends on
    /// scheduling and is not reproducible for more than one worker.
    pub fn natural_parallel<M: BlockSparse<T>>(
        &self,
        a: &M,
        rhs: &[T],
        x: &mut [T],
        direction: SweepDirection,
    ) -> Result<()> {
        self.check(a, rhs, x)?;
        let nworkers = current_workers().max(1).min(self.n.max(1));
        let shared: Vec<AtomicU64> = x.iter().map(|v| AtomicU64::new(v.to_bits_u64())).collect();
        let b = self.block_size;
        let n = self.n;
        let pass = |reverse: bool| {
            (0..nworkers).into_par_iter().for_each(|c| {
                let lo = c * n / nworkers;
                let hi = (c + 1) * n / nworkers;
                let mut buf = [T::zero(); MAX_BLOCK];
                let mut visit = |i: usize| {
                    self.row_update(
                        a,
                        rhs,
                        i,
                        |j| T::from_bits_u64(shared[j].load(Ordering::Relaxed)),
                        &mut buf,
                    );
                    for r in 0..b {
                        shared[i * b + r].store(buf[r].to_bits_u64(), Ordering::Relaxed);
                    }
                };
                if reverse {
                    (lo..hi).rev().for_each(&mut visit);
                } else {
                    (lo..hi).for_each(&mut visit);
                }
            });
        };
        match direction {
            SweepDirection::Forward => pass(false),
            SweepDirection::Backward => pass(true),
            SweepDirection::Symmetric => {
                pass(false);
                pass(true);
            }
        }
        for (xi, s) in x.iter_mut().zip(&shared) {
            *xi = T::from_bits_u64(s.load(Ordering::Relaxed));
        }
        Ok(())
    }

    /// Multi-color sweep: colors in sequence, rows of one color in parallel.
    ///
    /// Rows of a color are updated level by level according to `schedule`;
    /// every level is computed in parallel from the current iterate and
    /// written back before the next starts. The result is the sequential
    /// sweep in color order (ascending index inside a color), bitwise, for
    /// any worker count.
    pub fn multicolor<M: BlockSparse<T>>(
        &self,
        a: &M,
        rhs: &[T],
        x: &mut [T],
        schedule: &MulticolorSchedule,
        direction: SweepDirection,
    ) -> Result<()> {
        self.check(a, rhs, x)?;
        check_len("color schedule", self.n, schedule.n)?;
        match direction {
            SweepDirection::Forward => self.color_pass(a, rhs, x, &schedule.forward),
            SweepDirection::Backward => self.color_pass(a, rhs, x, &schedule.backward),
            SweepDirection::Symmetric => {
                self.color_pass(a, rhs, x, &schedule.forward);
                self.color_pass(a, rhs, x, &schedule.backward);
            }
        }
        Ok(())
    }

    fn color_pass<M: BlockSparse<T>>(&self, a: &M, rhs: &[T], x: &mut [T], levels: &[Vec<usize>]) {
        let b = self.block_size;
        let mut updates: Vec<T> = Vec::new();
        for level in levels {
            updates.clear();
            updates.resize(level.len() * b, T::zero());
            {
                let xs: &[T] = x;
                updates
                    .par_chunks_mut(b)
                    .with_min_len(64)
                    .zip(level.par_iter())
                    .for_each(|(out, &i)| {
                        let mut buf = [T::zero(); MAX_BLOCK];
                        self.row_update(a, rhs, i, |j| xs[j], &mut buf);
                        out.copy_from_slice(&buf[..b]);
                    });
            }
            for (p, &i) in level.iter().enumerate() {
                x[i * b..(i + 1) * b].copy_from_slice(&updates[p * b..(p + 1) * b]);
            }
        }
    }
}

/// Update schedule for multi-color sweeps.
///
/// Colors run in partition order. Inside a color, rows coupled through a
/// nonzero same-color entry (possible only through weak connections when
/// `theta > 0`) are layered so a row follows every same-color row it reads
/// that precedes it in the sweep, and is never written before an earlier row
/// that reads it. With an independent partition each color is
/// a single level.
#[derive(Debug, Clone, PartialEq)]
pub struct MulticolorSchedule {
    n: usize,
    colors: usize,
    forward: Vec<Vec<usize>>,
    backward: Vec<Vec<usize>>,
}

impl MulticolorSchedule {
    pub fn new<T: Scalar, M: BlockSparse<T>>(a: &M, partition: &ColorPartition) -> Result<Self> {
        let n = a.block_rows();
        check_len("color partition", n, partition.num_vertices())?;
        let rp = a.row_ptr();
        let ci = a.col_idx();
        let mut pos = vec![usize::MAX; n];
        let mut level = vec![0usize; n];
        let mut floor = vec![0usize; n];
        let mut forward = Vec::new();
        let mut backward = Vec::new();
        for (c, g) in partition.groups().iter().enumerate() {
            for (p, &v) in g.iter().enumerate() {
                if v >= n || partition.color_of(v) != c {
                    return Err(SolverError::InvalidParameter(format!(
                        "vertex {v} is not a valid member of color {c}"
                    )));
                }
                pos[v] = p;
            }
            let coupled = |i: usize, k: usize| {
                let j = ci[k];
                j != i && partition.color_of(j) == c && a.block(k).iter().any(|v| *v != T::zero())
            };
            for reverse in [false, true] {
                let order: Box<dyn Iterator<Item = &usize>> = if reverse {
                    Box::new(g.iter().rev())
                } else {
                    Box::new(g.iter())
                };
                let mut layers: Vec<Vec<usize>> = Vec::new();
                for &v in g {
                    floor[v] = 0;
                }
                for &i in order {
                    let before = |j: usize| if reverse { pos[j] > pos[i] } else { pos[j] < pos[i] };
                    let mut lvl = floor[i];
                    for k in rp[i]..rp[i + 1] {
                        if coupled(i, k) && before(ci[k]) {
                            lvl = lvl.max(level[ci[k]] + 1);
                        }
                    }
                    level[i] = lvl;
                    // a later row read here must not be written before this read
                    for k in rp[i]..rp[i + 1] {
                        if coupled(i, k) && !before(ci[k]) {
                            floor[ci[k]] = floor[ci[k]].max(lvl);
                        }
                    }
                    if layers.len() <= lvl {
                        layers.resize(lvl + 1, Vec::new());
                    }
                    layers[lvl].push(i);
                }
                if reverse {
                    backward.push(layers);
                } else {
                    forward.push(layers);
                }
            }
        }
        backward.reverse();
        Ok(Self {
            n,
            colors: partition.num_colors(),
            forward: forward.into_iter().flatten().collect(),
            backward: backward.into_iter().flatten().collect(),
        })
    }

    pub fn num_colors(&self) -> usize {
        self.colors
    }

    /// Total number of parallel steps in one forward sweep.
    pub fn forward_steps(&self) -> usize {
        self.forward.len()
    }
}

/// A prepared smoother: factored diagonal plus the sweep configuration.
#[derive(Debug, Clone)]
pub struct Smoother<T> {
    spec: SmootherSpec,
    gs: GaussSeidel<T>,
    schedule: Option<MulticolorSchedule>,
}

impl<T: Scalar> Smoother<T> {
    pub fn new<M: BlockSparse<T>>(a: &M, spec: SmootherSpec) -> Result<Self> {
        spec.validate(a.block_rows())?;
        let schedule = match (&spec.kind, &spec.partition) {
            (SmootherKind::PgsScm, Some(p)) => Some(MulticolorSchedule::new(a, p)?),
            _ => None,
        };
        Ok(Self {
            spec,
            gs: GaussSeidel::new(a)?,
            schedule,
        })
    }

    pub fn spec(&self) -> &SmootherSpec {
        &self.spec
    }

    pub fn kind(&self) -> SmootherKind {
        self.spec.kind
    }

    pub fn schedule(&self) -> Option<&MulticolorSchedule> {
        self.schedule.as_ref()
    }

    /// Applies `spec.sweeps` sweeps in the configured direction.
    pub fn apply<M: BlockSparse<T>>(&self, a: &M, rhs: &[T], x: &mut [T]) -> Result<()> {
        self.apply_with(a, rhs, x, self.spec.direction, self.spec.sweeps)
    }

    pub fn apply_with<M: BlockSparse<T>>(
        &self,
        a: &M,
        rhs: &[T],
        x: &mut [T],
        direction: SweepDirection,
        sweeps: usize,
    ) -> Result<()> {
        for _ in 0..sweeps {
            match self.spec.kind {
                SmootherKind::ClassicGs => self.gs.classic(a, rhs, x, direction)?,
                SmootherKind::PgsNo => self.gs.natural_parallel(a, rhs, x, direction)?,
                SmootherKind::PgsScm => {
                    let sched = self.schedule.as_ref().expect("built at construction");
                    self.gs.multicolor(a, rhs, x, sched, direction)?
                }
            }
        }
        Ok(())
    }
}

/// Runs the sweeps described by `spec` from `x` and returns the new iterate.
pub fn gs_sweep<T: Scalar, M: BlockSparse<T>>(
    a: &M,
    rhs: &[T],
    x: &[T],
    spec: &SmootherSpec,
) -> Result<Vec<T>> {
    let s = Smoother::new(a, spec.clone())?;
    let mut out = x.to_vec();
    s.apply(a, rhs, &mut out)?;
    Ok(out)
}

/// One forward PGS-NO sweep on a dedicated pool of `nworkers` threads.
pub fn pgs_no_sweep<T: Scalar, M: BlockSparse<T>>(
    a: &M,
    rhs: &[T],
    x: &[T],
    nworkers: usize,
) -> Result<Vec<T>> {
    let gs = GaussSeidel::new(a)?;
    let mut out = x.to_vec();
    with_workers(nworkers, || gs.natural_parallel(a, rhs, &mut out, SweepDirection::Forward))?;
    Ok(out)
}

/// One forward PGS-SCM sweep in the current pool.
pub fn pgs_scm_sweep<T: Scalar, M: BlockSparse<T>>(
    a: &M,
    rhs: &[T],
    x: &[T],
    partition: &ColorPartition,
) -> Result<Vec<T>> {
    let gs = GaussSeidel::new(a)?;
    let schedule = MulticolorSchedule::new(a, partition)?;
    let mut out = x.to_vec();
    gs.multicolor(a, rhs, &mut out, &schedule, SweepDirection::Forward)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::color_matrix;
    use crate::sparse::{BlockCsrMatrix, CsrMatrix};

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
    fn diagonal_matrix_solved_in_one_sweep() {
        let a = CsrMatrix::from_diagonal(&[2.0, 4.0, 8.0]);
        let x = gs_sweep(&a, &[1.0, 1.0, 1.0], &[0.0; 3], &SmootherSpec::classic(SweepDirection::Forward))
            .unwrap();
        assert_eq!(x, vec![0.5, 0.25, 0.125]);
    }

    #[test]
    fn hand_gs_step() {
        let a = tridiag(2);
        let x = gs_sweep(&a, &[1.0, 1.0], &[0.0, 0.0], &SmootherSpec::classic(SweepDirection::Forward))
            .unwrap();
        assert_eq!(x, vec![0.5, 0.75]);
    }

    #[test]
    fn zero_diagonal_is_reported() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (1, 1, 0.0), (1, 0, 1.0)]).unwrap();
        let err = gs_sweep(&a, &[1.0, 1.0], &[0.0, 0.0], &SmootherSpec::classic(SweepDirection::Forward))
            .unwrap_err();
        assert!(matches!(err, SolverError::SingularDiagonal { row: 1 }));
    }

    #[test]
    fn missing_diagonal_is_reported() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (1, 0, 1.0)]).unwrap();
        assert!(matches!(GaussSeidel::new(&a), Err(SolverError::MissingDiagonal { row: 1 })));
    }

    #[test]
    fn pgs_no_single_worker_is_classic() {
        let a = tridiag(50);
        let rhs: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).cos()).collect();
        let x0 = vec![0.1; 50];
        let gs = gs_sweep(&a, &rhs, &x0, &SmootherSpec::classic(SweepDirection::Forward)).unwrap();
        let no = pgs_no_sweep(&a, &rhs, &x0, 1).unwrap();
        assert_eq!(gs, no);
    }

    #[test]
    fn pgs_no_block_aligned_matches_classic() {
        // two uncoupled 3x3 blocks on rows 0..3 and 3..6
        let mut e = Vec::new();
        for base in [0, 3] {
            for i in 0..3 {
                e.push((base + i, base + i, 4.0));
                if i > 0 {
                    e.push((base + i, base + i - 1, -1.0));
                    e.push((base + i - 1, base + i, -1.0));
                }
            }
        }
        let a = CsrMatrix::from_triplets(6, 6, e).unwrap();
        let rhs = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let gs = gs_sweep(&a, &rhs, &[0.0; 6], &SmootherSpec::classic(SweepDirection::Forward)).unwrap();
        for w in [1, 2] {
            assert_eq!(pgs_no_sweep(&a, &rhs, &[0.0; 6], w).unwrap(), gs);
        }
    }

    #[test]
    fn pgs_no_seam_reads_stale_or_fresh() {
        // n = 4, chunks {0,1} and {2,3}; row 2 sees x1 either before
        // (0.0) or after (0.75) the first chunk updated it
        let a = tridiag(4);
        let rhs = [1.0; 4];
        let sequential = vec![0.5, 0.75, 0.875, 0.9375];
        let stale_seam = vec![0.5, 0.75, 0.5, 0.75];
        let out = pgs_no_sweep(&a, &rhs, &[0.0; 4], 2).unwrap();
        assert!(out == sequential || out == stale_seam, "{out:?}");
    }

    #[test]
    fn single_color_equals_classic() {
        let a = tridiag(20);
        let rhs: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let x0 = vec![0.0; 20];
        let p = color_matrix(&a, 1.0).unwrap();
        assert_eq!(p.num_colors(), 1);
        let scm = pgs_scm_sweep(&a, &rhs, &x0, &p).unwrap();
        let gs = gs_sweep(&a, &rhs, &x0, &SmootherSpec::classic(SweepDirection::Forward)).unwrap();
        assert_eq!(scm, gs);
    }

    #[test]
    fn single_color_upper_coupling_reads_old_values() {
        // row 0 reads x2, rows 1 and 2 are otherwise free: x2 must not be
        // updated before row 0 is
        let a = CsrMatrix::from_triplets(
            3,
            3,
            vec![(0, 0, 2.0), (0, 2, 1.0), (1, 1, 2.0), (2, 2, 2.0), (2, 1, 1.0)],
        )
        .unwrap();
        let p = ColorPartition::single(3);
        let rhs = [1.0, 1.0, 1.0];
        let x0 = [1.0, 1.0, 1.0];
        let gs = gs_sweep(&a, &rhs, &x0, &SmootherSpec::classic(SweepDirection::Forward)).unwrap();
        for w in [1, 2] {
            let scm = with_workers(w, || pgs_scm_sweep(&a, &rhs, &x0, &p)).unwrap();
            assert_eq!(scm, gs);
        }
        let mut bwd = x0.to_vec();
        GaussSeidel::new(&a)
            .unwrap()
            .classic(&a, &rhs, &mut bwd, SweepDirection::Backward)
            .unwrap();
        let spec = SmootherSpec::multicolor(p, SweepDirection::Backward);
        assert_eq!(gs_sweep(&a, &rhs, &x0, &spec).unwrap(), bwd);
    }

    #[test]
    fn two_color_tridiagonal_matches_permuted_order() {
        let a = tridiag(4);
        let p = color_matrix(&a, 0.0).unwrap();
        assert_eq!(p.num_colors(), 2);
        let rhs = [1.0; 4];
        let scm = pgs_scm_sweep(&a, &rhs, &[0.0; 4], &p).unwrap();
        let gs = GaussSeidel::new(&a).unwrap();
        let mut oracle = vec![0.0; 4];
        gs.sweep_in_order(&a, &rhs, &mut oracle, &p.ordering()).unwrap();
        assert_eq!(scm, oracle);
        // and against physically permuted storage, up to summation order
        let order = p.ordering();
        let pa = a.permute_symmetric(&order).unwrap();
        let prhs: Vec<f64> = order.iter().map(|&i| rhs[i]).collect();
        let px = gs_sweep(&pa, &prhs, &[0.0; 4], &SmootherSpec::classic(SweepDirection::Forward)).unwrap();
        for (new, &old) in order.iter().enumerate() {
            assert!((px[new] - scm[old]).abs() < 1e-15);
        }
    }

    #[test]
    fn block_gs_solves_block_diagonal() {
        let a = BlockCsrMatrix::from_block_triplets(
            3,
            2,
            2,
            vec![
                (0, 0, vec![0.0, 1.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 3.0]),
                (1, 1, vec![4.0, 1.0, 0.0, 1.0, 4.0, 1.0, 0.0, 1.0, 4.0]),
            ],
        )
        .unwrap();
        let xs: [f64; 6] = [1.0, -1.0, 2.0, 0.5, 0.25, -0.75];
        let rhs = a.spmv(&xs).unwrap();
        let x = gs_sweep(&a, &rhs, &[0.0; 6], &SmootherSpec::classic(SweepDirection::Forward)).unwrap();
        for (u, v) in x.iter().zip(xs) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn partition_size_mismatch() {
        let a = tridiag(4);
        let p = ColorPartition::single(3);
        assert!(pgs_scm_sweep(&a, &[1.0; 4], &[0.0; 4], &p).is_err());
        assert!(Smoother::new(&a, SmootherSpec::multicolor(p, SweepDirection::Forward)).is_err());
    }
}
