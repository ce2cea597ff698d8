//! Unsmoothed pairwise-aggregation AMG with V- and K-cycles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coloring::{color_matrix, strong_connections, ColorPartition};
use crate::error::{check_len, Result, SolverError};
use crate::parallel::ROW_GRAIN;
use crate::scalar::Scalar;
use crate::smoothers::{Smoother, SmootherKind, SmootherSpec, SweepDirection};
use crate::sparse::{axpy, dot, norm2, BlockSparse, CsrMatrix, DenseLu};

/// Vertex to aggregate map. Every aggregate has one or two members.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AggregationMap {
    pub aggregate_of: Vec<usize>,
    pub n_aggregates: usize,
}

impl AggregationMap {
    /// Members of each aggregate in ascending order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut m = vec![Vec::with_capacity(2); self.n_aggregates];
        for (v, &g) in self.aggregate_of.iter().enumerate() {
            m[g].push(v);
        }
        m
    }

    /// Piecewise-constant prolongation, one unit entry per row.
    pub fn prolongation<T: Scalar>(&self) -> CsrMatrix<T> {
        let n = self.aggregate_of.len();
        CsrMatrix::new(
            n,
            self.n_aggregates,
            (0..=n).collect(),
            self.aggregate_of.clone(),
            vec![T::one(); n],
        )
        .expect("one entry per row is canonical")
    }
}

/// Greedy pairwise matching on the strong graph.
///
/// Vertices are visited in ascending order; an unmatched vertex pairs with the
/// unmatched strong neighbour of largest `|a_ij| + |a_ji|` (lowest index on
/// ties) or stays a singleton.
pub fn pairwise_aggregate<T: Scalar>(a: &CsrMatrix<T>, theta: f64) -> Result<AggregationMap> {
    let s = strong_connections(a, theta)?.symmetrized();
    let n = a.nrows();
    let at = a.transpose();
    let weight = |m: &CsrMatrix<T>, i: usize, j: usize| m.get(i, j).map(|v| v.abs()).unwrap_or_else(T::zero);
    let mut aggregate_of = vec![usize::MAX; n];
    let mut next = 0;
    for i in 0..n {
        if aggregate_of[i] != usize::MAX {
            continue;
        }
        let mut best: Option<(usize, T)> = None;
        for &j in s.neighbors(i) {
            if j == i || aggregate_of[j] != usize::MAX {
                continue;
            }
            let w = weight(a, i, j) + weight(&at, i, j);
            if best.map_or(true, |(_, bw)| w > bw) {
                best = Some((j, w));
            }
        }
        aggregate_of[i] = next;
        if let Some((j, _)) = best {
            aggregate_of[j] = next;
        }
        next += 1;
    }
    Ok(AggregationMap {
        aggregate_of,
        n_aggregates: next,
    })
}

/// `P^T A P` for a piecewise-constant `P`.
pub fn galerkin_product<T: Scalar>(a: &CsrMatrix<T>, agg: &AggregationMap) -> Result<CsrMatrix<T>> {
    check_len("aggregation map", a.nrows(), agg.aggregate_of.len())?;
    let g = &agg.aggregate_of;
    let entries = a.triplets().map(|(i, j, v)| (g[i], g[j], v)).collect();
    CsrMatrix::from_triplets_summed(agg.n_aggregates, agg.n_aggregates, entries)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CycleKind {
    V,
    #[default]
    K,
}

impl std::fmt::Display for CycleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CycleKind::V => "v",
            CycleKind::K => "k",
        })
    }
}

impl std::str::FromStr for CycleKind {
    type Err = SolverError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "v" => Ok(Self::V),
            "k" => Ok(Self::K),
            other => Err(SolverError::InvalidParameter(format!("unknown cycle {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AmgParams {
    pub coarsest_size: usize,
    pub max_levels: usize,
    /// Strength threshold used by the pairwise matching.
    pub theta_amg: f64,
    /// Strength threshold used to color each level for PGS-SCM.
    pub theta_color: f64,
    pub pre_sweeps: usize,
    pub post_sweeps: usize,
    pub smoother: SmootherKind,
    pub cycle: CycleKind,
    /// Coarsening stops when `n_coarse > stall_ratio * n_fine`.
    pub stall_ratio: f64,
}

impl Default for AmgParams {
    fn default() -> Self {
        Self {
            coarsest_size: 200,
            max_levels: 20,
            theta_amg: 0.05,
            theta_color: 0.0,
            pre_sweeps: 1,
            post_sweeps: 1,
            smoother: SmootherKind::PgsScm,
            cycle: CycleKind::K,
            stall_ratio: 0.9,
        }
    }
}

impl AmgParams {
    fn validate(&self) -> Result<()> {
        if self.coarsest_size == 0 || self.max_levels == 0 {
            return Err(SolverError::InvalidParameter(
                "coarsest_size and max_levels must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.theta_amg) || !(0.0..=1.0).contains(&self.theta_color) {
            return Err(SolverError::InvalidParameter("AMG thresholds must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AmgLevel<T> {
    pub a: CsrMatrix<T>,
    /// Map to the next coarser level; `None` on the coarsest.
    pub aggregation: Option<AggregationMap>,
    pub partition: Option<ColorPartition>,
    smoother: Option<Smoother<T>>,
    members: Vec<Vec<usize>>,
    spd: bool,
}

impl<T: Scalar> AmgLevel<T> {
    pub fn size(&self) -> usize {
        self.a.nrows()
    }

    pub fn is_spd(&self) -> bool {
        self.spd
    }

    pub fn smoother(&self) -> Option<&Smoother<T>> {
        self.smoother.as_ref()
    }

    pub fn prolongation(&self) -> Option<CsrMatrix<T>> {
        self.aggregation.as_ref().map(|m| m.prolongation())
    }
}

#[derive(Debug, Clone)]
pub struct AmgHierarchy<T> {
    levels: Vec<AmgLevel<T>>,
    coarsest_lu: DenseLu<T>,
    params: AmgParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub size: usize,
    pub nnz: usize,
    pub colors: Option<usize>,
    pub spd: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchySummary {
    pub levels: Vec<LevelSummary>,
    pub operator_complexity: f64,
    pub grid_complexity: f64,
}

fn looks_spd<T: Scalar>(a: &CsrMatrix<T>) -> bool {
    let pos_diag = (0..a.nrows()).all(|i| a.get(i, i).is_some_and(|d| d > T::zero()));
    pos_diag && a.is_symmetric(T::lit(1e-12))
}

fn make_smoother<T: Scalar>(
    a: &CsrMatrix<T>,
    params: &AmgParams,
) -> Result<(Option<ColorPartition>, Smoother<T>)> {
    let sweeps = params.pre_sweeps.max(params.post_sweeps).max(1);
    let (partition, spec) = match params.smoother {
        SmootherKind::PgsScm => {
            let p = color_matrix(a, params.theta_color)?;
            (Some(p.clone()), SmootherSpec::multicolor(p, SweepDirection::Forward))
        }
        SmootherKind::PgsNo => (None, SmootherSpec::natural_parallel(SweepDirection::Forward)),
        SmootherKind::ClassicGs => (None, SmootherSpec::classic(SweepDirection::Forward)),
    };
    let spec = SmootherSpec { sweeps, ..spec };
    Ok((partition, Smoother::new(a, spec)?))
}

/// Aggregate, form `P^T A P`, repeat; the last level is factored densely.
pub fn build_hierarchy<T: Scalar>(a: &CsrMatrix<T>, params: &AmgParams) -> Result<AmgHierarchy<T>> {
    params.validate()?;
    if !a.is_square() || a.nrows() == 0 {
        return Err(SolverError::InvalidMatrix("AMG needs a non-empty square matrix".into()));
    }
    let mut levels = Vec::new();
    let mut cur = a.clone();
    loop {
        let n = cur.nrows();
        if n <= params.coarsest_size || levels.len() + 1 >= params.max_levels {
            break;
        }
        let agg = pairwise_aggregate(&cur, params.theta_amg)?;
        if agg.n_aggregates as f64 > params.stall_ratio * n as f64 {
            break;
        }
        let coarse = galerkin_product(&cur, &agg)?;
        let (partition, smoother) = make_smoother(&cur, params)?;
        levels.push(AmgLevel {
            spd: looks_spd(&cur),
            members: agg.members(),
            aggregation: Some(agg),
            partition,
            smoother: Some(smoother),
            a: cur,
        });
        cur = coarse;
    }
    let n = cur.nrows();
    let coarsest_lu = DenseLu::factor(n, &cur.to_dense()).ok_or_else(|| {
        SolverError::CoarseSolve(format!("dense factorization of the {n}x{n} coarsest operator failed"))
    })?;
    levels.push(AmgLevel {
        spd: looks_spd(&cur),
        a: cur,
        aggregation: None,
        partition: None,
        smoother: None,
        members: Vec::new(),
    });
    log::debug!(
        "AMG hierarchy: {:?}",
        levels.iter().map(|l| l.size()).collect::<Vec<_>>()
    );
    Ok(AmgHierarchy {
        levels,
        coarsest_lu,
        params: params.clone(),
    })
}

impl<T: Scalar> AmgHierarchy<T> {
    pub fn levels(&self) -> &[AmgLevel<T>] {
        &self.levels
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn params(&self) -> &AmgParams {
        &self.params
    }

    pub fn size(&self) -> usize {
        self.levels[0].size()
    }

    pub fn summary(&self) -> HierarchySummary {
        let fine_nnz = self.levels[0].a.nnz() as f64;
        let fine_n = self.size() as f64;
        HierarchySummary {
            levels: self
                .levels
                .iter()
                .map(|l| LevelSummary {
                    size: l.size(),
                    nnz: l.a.nnz(),
                    colors: l.partition.as_ref().map(|p| p.num_colors()),
                    spd: l.spd,
                })
                .collect(),
            operator_complexity: self.levels.iter().map(|l| l.a.nnz() as f64).sum::<f64>() / fine_nnz,
            grid_complexity: self.levels.iter().map(|l| l.size() as f64).sum::<f64>() / fine_n,
        }
    }

    /// Per coarsening step, the largest entrywise gap between the stored
    /// coarse operator and an explicit `P^T A P`, relative to its largest
    /// entry.
    pub fn galerkin_errors(&self) -> Result<Vec<T>> {
        let mut out = Vec::new();
        for pair in self.levels.windows(2) {
            let p = pair[0].prolongation().expect("non-coarsest");
            let explicit = p.transpose().matmul(&pair[0].a)?.matmul(&p)?;
            let stored = &pair[1].a;
            let scale = explicit.values().iter().fold(T::zero(), |m, v| m.max(v.abs()));
            let mut worst = T::zero();
            for (i, j, v) in explicit.triplets() {
                worst = worst.max((stored.get(i, j).unwrap_or_else(T::zero) - v).abs());
            }
            for (i, j, v) in stored.triplets() {
                if explicit.get(i, j).is_none() {
                    worst = worst.max(v.abs());
                }
            }
            out.push(if scale > T::zero() { worst / scale } else { worst });
        }
        Ok(out)
    }

    /// One cycle from a zero initial guess: `z ~ A^{-1} r`.
    pub fn cycle(&self, r: &[T], kind: CycleKind) -> Result<Vec<T>> {
        check_len("AMG cycle rhs", self.size(), r.len())?;
        self.cycle_at(0, r, kind)
    }

    /// Stationary iteration `x += cycle(b - A x)`; returns the residual
    /// norms, starting with the initial one.
    pub fn iterate(&self, b: &[T], x: &mut [T], cycles: usize, kind: CycleKind) -> Result<Vec<T>> {
        let a = &self.levels[0].a;
        let mut r = a.residual(b, x)?;
        let mut history = vec![norm2(&r)];
        for _ in 0..cycles {
            let z = self.cycle(&r, kind)?;
            axpy(T::one(), &z, x)?;
            r = a.residual(b, x)?;
            history.push(norm2(&r));
        }
        Ok(history)
    }

    fn coarsest_solve(&self, r: &[T]) -> Vec<T> {
        let mut x = r.to_vec();
        self.coarsest_lu.solve_in_place(&mut x);
        x
    }

    fn cycle_at(&self, l: usize, r: &[T], kind: CycleKind) -> Result<Vec<T>> {
        if l + 1 == self.levels.len() {
            return Ok(self.coarsest_solve(r));
        }
        let lvl = &self.levels[l];
        let smoother = lvl.smoother.as_ref().expect("non-coarsest levels carry a smoother");
        let mut x = vec![T::zero(); r.len()];
        if self.params.pre_sweeps > 0 {
            smoother.apply_with(&lvl.a, r, &mut x, SweepDirection::Forward, self.params.pre_sweeps)?;
        }
        let res = lvl.a.residual(r, &x)?;
        let rc: Vec<T> = lvl
            .members
            .par_iter()
            .with_min_len(ROW_GRAIN)
            .map(|m| m.iter().map(|&i| res[i]).fold(T::zero(), |s, v| s + v))
            .collect();
        let ec = match kind {
            CycleKind::V => self.cycle_at(l + 1, &rc, kind)?,
            CycleKind::K if l + 2 == self.levels.len() => self.coarsest_solve(&rc),
            CycleKind::K => self.krylov_two_step(l + 1, &rc)?,
        };
        let g = &lvl.aggregation.as_ref().expect("non-coarsest").aggregate_of;
        x.par_iter_mut()
            .with_min_len(ROW_GRAIN)
            .enumerate()
            .for_each(|(i, xi)| *xi += ec[g[i]]);
        if self.params.post_sweeps > 0 {
            smoother.apply_with(&lvl.a, r, &mut x, SweepDirection::Backward, self.params.post_sweeps)?;
        }
        Ok(x)
    }

    /// Two flexible Krylov steps on level `l`, each preconditioned by a
    /// K-cycle from that level. Conjugate-gradient form on SPD levels,
    /// minimal-residual form otherwise.
    fn krylov_two_step(&self, l: usize, r: &[T]) -> Result<Vec<T>> {
        const TRUNCATE: f64 = 0.25;
        let a = &self.levels[l].a;
        let c = self.cycle_at(l, r, CycleKind::K)?;
        let v = a.spmv(&c)?;
        let rnorm = norm2(r);
        let scaled = |s: T, x: &[T]| x.iter().map(|&xi| s * xi).collect::<Vec<T>>();
        if self.levels[l].spd {
            let rho1 = dot(&c, &v)?;
            if rho1 <= T::zero() {
                return Ok(c);
            }
            let alpha1 = dot(&c, r)?;
            let a1 = alpha1 / rho1;
            let mut r1 = r.to_vec();
            axpy(-a1, &v, &mut r1)?;
            if norm2(&r1) <= T::lit(TRUNCATE) * rnorm {
                return Ok(scaled(a1, &c));
            }
            let d = self.cycle_at(l, &r1, CycleKind::K)?;
            let w = a.spmv(&d)?;
            let gamma = dot(&d, &v)?;
            let beta = dot(&d, &w)?;
            let alpha2 = dot(&d, &r1)?;
            let rho2 = beta - gamma * gamma / rho1;
            if rho2 <= T::zero() {
                return Ok(scaled(a1, &c));
            }
            let mut e = scaled(a1 - gamma * alpha2 / (rho1 * rho2), &c);
            axpy(alpha2 / rho2, &d, &mut e)?;
            Ok(e)
        } else {
            let vv = dot(&v, &v)?;
            if vv <= T::zero() {
                return Ok(c);
            }
            let vr = dot(&v, r)?;
            let a1 = vr / vv;
            let mut r1 = r.to_vec();
            axpy(-a1, &v, &mut r1)?;
            if norm2(&r1) <= T::lit(TRUNCATE) * rnorm {
                return Ok(scaled(a1, &c));
            }
            let d = self.cycle_at(l, &r1, CycleKind::K)?;
            let w = a.spmv(&d)?;
            let vw = dot(&v, &w)?;
            let ww = dot(&w, &w)?;
            let wr = dot(&w, r)?;
            let det = vv * ww - vw * vw;
            if det <= T::epsilon() * vv * ww {
                return Ok(scaled(a1, &c));
            }
            let alpha = (ww * vr - vw * wr) / det;
            let beta = (vv * wr - vw * vr) / det;
            let mut e = scaled(alpha, &c);
            axpy(beta, &d, &mut e)?;
            Ok(e)
        }
    }
}

/// Free-function form of [`AmgHierarchy::cycle`].
pub fn amg_cycle<T: Scalar>(h: &AmgHierarchy<T>, r: &[T], kind: CycleKind) -> Result<Vec<T>> {
    h.cycle(r, kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson1d(n: usize) -> CsrMatrix<f64> {
        let mut e = Vec::new();
        for i in 0..n {
            e.push((i, i, 2.0));
            if i > 0 {
                e.push((i, i - 1, -1.0));
                e.push((i - 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, e).unwrap()
    }

    #[test]
    fn diagonal_gives_singletons() {
        let a = CsrMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let m = pairwise_aggregate(&a, 0.05).unwrap();
        assert_eq!(m.n_aggregates, 3);
    }

    #[test]
    fn coupled_pair() {
        let a = CsrMatrix::from_dense(2, 2, &[2.0, -1.0, -1.0, 2.0]).unwrap();
        let m = pairwise_aggregate(&a, 0.05).unwrap();
        assert_eq!(m.aggregate_of, vec![0, 0]);
    }

    #[test]
    fn tridiagonal_pairs() {
        let m = pairwise_aggregate(&poisson1d(6), 0.05).unwrap();
        assert_eq!(m.aggregate_of, vec![0, 0, 1, 1, 2, 2]);
        assert_eq!(m.n_aggregates, 3);
    }

    #[test]
    fn prolongation_rows_are_unit() {
        let m = pairwise_aggregate(&poisson1d(7), 0.05).unwrap();
        let p: CsrMatrix<f64> = m.prolongation();
        for i in 0..7 {
            let (c, v) = p.row(i);
            assert_eq!(c.len(), 1);
            assert_eq!(v, &[1.0]);
        }
    }

    #[test]
    fn galerkin_matches_triple_product() {
        let a = poisson1d(10);
        let m = pairwise_aggregate(&a, 0.05).unwrap();
        let p = m.prolongation();
        let explicit = p.transpose().matmul(&a).unwrap().matmul(&p).unwrap();
        let fast = galerkin_product(&a, &m).unwrap();
        assert_eq!(explicit.to_dense(), fast.to_dense());
    }

    #[test]
    fn poisson_64_halves() {
        let params = AmgParams {
            coarsest_size: 4,
            ..AmgParams::default()
        };
        let h = build_hierarchy(&poisson1d(64), &params).unwrap();
        let sizes: Vec<usize> = h.levels().iter().map(|l| l.size()).collect();
        assert_eq!(sizes, vec![64, 32, 16, 8, 4]);
        assert!(h.galerkin_errors().unwrap().iter().all(|e| *e == 0.0));
    }

    #[test]
    fn single_level_is_direct() {
        let a = poisson1d(5);
        let h = build_hierarchy(&a, &AmgParams::default()).unwrap();
        assert_eq!(h.num_levels(), 1);
        let z = h.cycle(&[1.0; 5], CycleKind::V).unwrap();
        let r = a.residual(&[1.0; 5], &z).unwrap();
        assert!(norm2(&r) < 1e-13);
    }

    #[test]
    fn v_cycle_reduces_residual() {
        let a = poisson1d(64);
        let params = AmgParams {
            coarsest_size: 8,
            ..AmgParams::default()
        };
        let h = build_hierarchy(&a, &params).unwrap();
        let b: Vec<f64> = (0..64).map(|i| ((i * 7 % 11) as f64) - 5.0).collect();
        let mut x = vec![0.0; 64];
        let hist = h.iterate(&b, &mut x, 1, CycleKind::V).unwrap();
        assert!(hist[1] < hist[0]);
    }

    #[test]
    fn k_cycle_on_nonsymmetric_level() {
        let n = 40;
        let mut e = Vec::new();
        for i in 0..n {
            e.push((i, i, 3.0));
            if i > 0 {
                e.push((i, i - 1, -1.5));
                e.push((i - 1, i, -0.5));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, e).unwrap();
        let params = AmgParams {
            coarsest_size: 4,
            ..AmgParams::default()
        };
        let h = build_hierarchy(&a, &params).unwrap();
        assert!(!h.levels()[1].is_spd());
        let b = vec![1.0; n];
        let mut x = vec![0.0; n];
        let hist = h.iterate(&b, &mut x, 10, CycleKind::K).unwrap();
        assert!(hist[10] < 1e-4 * hist[0]);
    }

    #[test]
    fn cycle_rejects_wrong_length() {
        let h = build_hierarchy(&poisson1d(5), &AmgParams::default()).unwrap();
        assert!(h.cycle(&[1.0; 3], CycleKind::V).is_err());
    }

    #[test]
    fn singular_coarsest_is_reported() {
        let a = CsrMatrix::from_dense(2, 2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            build_hierarchy(&a, &AmgParams::default()),
            Err(SolverError::CoarseSolve(_))
        ));
    }
}
