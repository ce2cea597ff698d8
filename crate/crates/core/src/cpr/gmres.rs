use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amg::{AmgHierarchy, CycleKind};
use crate::error::{check_len, Result, SolverError};
use crate::ilu::BiluFactors;
use crate::parallel::ROW_GRAIN;
use crate::scalar::Scalar;
use crate::sparse::{axpy, dot, norm2, BlockCsrMatrix, BlockSparse, CsrMatrix};

pub trait LinearOperator<T: Scalar>: Sync {
    /// Order of the (square) operator.
    fn size(&self) -> usize;
    fn apply_into(&self, x: &[T], y: &mut [T]) -> Result<()>;
}

impl<T: Scalar> LinearOperator<T> for CsrMatrix<T> {
    fn size(&self) -> usize {
        self.nrows()
    }
    fn apply_into(&self, x: &[T], y: &mut [T]) -> Result<()> {
        self.spmv_into(x, y)
    }
}

impl<T: Scalar> LinearOperator<T> for BlockCsrMatrix<T> {
    fn size(&self) -> usize {
        BlockSparse::dim(self)
    }
    fn apply_into(&self, x: &[T], y: &mut [T]) -> Result<()> {
        self.spmv_into(x, y)
    }
}

/// Right preconditioner `z = B r`.
pub trait Preconditioner<T: Scalar>: Sync {
    fn apply(&self, r: &[T]) -> Result<Vec<T>>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPreconditioner;

impl<T: Scalar> Preconditioner<T> for IdentityPreconditioner {
    fn apply(&self, r: &[T]) -> Result<Vec<T>> {
        Ok(r.to_vec())
    }
}

impl<T: Scalar> Preconditioner<T> for BiluFactors<T> {
    fn apply(&self, r: &[T]) -> Result<Vec<T>> {
        BiluFactors::apply(self, r)
    }
}

impl<T: Scalar> Preconditioner<T> for AmgHierarchy<T> {
    fn apply(&self, r: &[T]) -> Result<Vec<T>> {
        self.cycle(r, self.params().cycle)
    }
}

/// Restarted GMRES settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GmresParams {
    /// Krylov dimension per cycle.
    #[serde(alias = "m")]
    pub restart: usize,
    /// Maximum number of restart cycles.
    #[serde(alias = "MaxIt", alias = "max_it")]
    pub max_restarts: usize,
    /// Target for `||r|| / ||r0||`.
    pub tol: f64,
}

impl Default for GmresParams {
    fn default() -> Self {
        Self {
            restart: 28,
            max_restarts: 100,
            tol: 1e-5,
        }
    }
}

impl GmresParams {
    pub fn validate(&self) -> Result<()> {
        if self.restart == 0 || self.max_restarts == 0 {
            return Err(SolverError::InvalidParameter("restart and MaxIt must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(SolverError::InvalidParameter("tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmresOutcome<T> {
    pub x: Vec<T>,
    /// Outer cycles run.
    pub restarts: usize,
    /// Arnoldi steps summed over all cycles.
    pub inner_iterations: usize,
    pub converged: bool,
    pub relative_residual: f64,
    /// Whether some cycle ended on an invariant Krylov subspace.
    pub happy_breakdown: bool,
}

fn givens<T: Scalar>(a: T, b: T) -> (T, T) {
    if b == T::zero() {
        (T::one(), T::zero())
    } else {
        let h = a.hypot(b);
        (a / h, b / h)
    }
}

/// Right-preconditioned restarted GMRES with modified Gram-Schmidt.
///
/// A cycle stops early once the least-squares residual drops below
/// `tol * ||r0||`; convergence is then confirmed on the true residual.
pub fn gmres_solve<T, A, P>(a: &A, b: &[T], x0: &[T], prec: &P, params: &GmresParams) -> Result<GmresOutcome<T>>
where
    T: Scalar,
    A: LinearOperator<T> + ?Sized,
    P: Preconditioner<T> + ?Sized,
{
    params.validate()?;
    let n = a.size();
    check_len("GMRES rhs", n, b.len())?;
    check_len("GMRES initial guess", n, x0.len())?;
    let m = params.restart;
    let tol = T::lit(params.tol);
    let mut x = x0.to_vec();
    let mut w = vec![T::zero(); n];

    let residual = |x: &[T], out: &mut Vec<T>| -> Result<T> {
        a.apply_into(x, out)?;
        out.par_iter_mut()
            .with_min_len(ROW_GRAIN)
            .zip(b.par_iter())
            .for_each(|(ri, &bi)| *ri = bi - *ri);
        Ok(norm2(out))
    };

    let mut r = vec![T::zero(); n];
    let beta0 = residual(&x, &mut r)?;
    if !beta0.is_finite() {
        return Err(SolverError::Divergence { iteration: 0 });
    }
    if beta0 == T::zero() {
        return Ok(GmresOutcome {
            x,
            restarts: 0,
            inner_iterations: 0,
            converged: true,
            relative_residual: 0.0,
            happy_breakdown: false,
        });
    }

    let mut basis: Vec<Vec<T>> = Vec::with_capacity(m + 1);
    let mut h = vec![vec![T::zero(); m]; m + 1];
    let mut cs = vec![T::zero(); m];
    let mut sn = vec![T::zero(); m];
    let mut g = vec![T::zero(); m + 1];
    let mut inner = 0usize;
    let mut beta = beta0;
    let mut happy = false;

    for cycle in 1..=params.max_restarts {
        basis.clear();
        let inv = T::one() / beta;
        basis.push(r.iter().map(|&v| v * inv).collect());
        g.iter_mut().for_each(|v| *v = T::zero());
        g[0] = beta;
        let mut k = 0;
        for j in 0..m {
            let z = prec.apply(&basis[j])?;
            a.apply_into(&z, &mut w)?;
            let wnorm = norm2(&w);
            for i in 0..=j {
                let hij = dot(&w, &basis[i])?;
                h[i][j] = hij;
                axpy(-hij, &basis[i], &mut w)?;
            }
            let hnext = norm2(&w);
            if !hnext.is_finite() {
                return Err(SolverError::Divergence { iteration: inner });
            }
            for i in 0..j {
                let (hi, hi1) = (h[i][j], h[i + 1][j]);
                h[i][j] = cs[i] * hi + sn[i] * hi1;
                h[i + 1][j] = -sn[i] * hi + cs[i] * hi1;
            }
            let (c, s) = givens(h[j][j], hnext);
            cs[j] = c;
            sn[j] = s;
            h[j][j] = c * h[j][j] + s * hnext;
            h[j + 1][j] = T::zero();
            g[j + 1] = -s * g[j];
            g[j] = c * g[j];
            inner += 1;
            k = j + 1;
            if hnext <= T::epsilon() * wnorm {
                happy = true;
                break;
            }
            if g[j + 1].abs() < tol * beta0 {
                break;
            }
            let inv = T::one() / hnext;
            basis.push(w.iter().map(|&v| v * inv).collect());
        }
        let mut y = vec![T::zero(); k];
        for i in (0..k).rev() {
            let mut acc = g[i];
            for l in i + 1..k {
                acc -= h[i][l] * y[l];
            }
            y[i] = acc / h[i][i];
        }
        let mut u = vec![T::zero(); n];
        u.par_iter_mut()
            .with_min_len(ROW_GRAIN)
            .enumerate()
            .for_each(|(p, up)| {
                let mut acc = T::zero();
                for (yi, v) in y.iter().zip(&basis) {
                    acc += *yi * v[p];
                }
                *up = acc;
            });
        let du = prec.apply(&u)?;
        axpy(T::one(), &du, &mut x)?;
        beta = residual(&x, &mut r)?;
        if !beta.is_finite() {
            return Err(SolverError::Divergence { iteration: inner });
        }
        let rel = beta / beta0;
        if rel < tol {
            return Ok(GmresOutcome {
                x,
                restarts: cycle,
                inner_iterations: inner,
                converged: true,
                relative_residual: rel.as_f64(),
                happy_breakdown: happy,
            });
        }
    }
    Ok(GmresOutcome {
        x,
        restarts: params.max_restarts,
        inner_iterations: inner,
        converged: false,
        relative_residual: (beta / beta0).as_f64(),
        happy_breakdown: happy,
    })
}

impl<T: Scalar> AmgHierarchy<T> {
    /// Preconditioner view with a fixed cycle type.
    pub fn with_cycle(&self, cycle: CycleKind) -> impl Preconditioner<T> + '_ {
        struct Fixed<'a, T>(&'a AmgHierarchy<T>, CycleKind);
        impl<T: Scalar> Preconditioner<T> for Fixed<'_, T> {
            fn apply(&self, r: &[T]) -> Result<Vec<T>> {
                self.0.cycle(r, self.1)
            }
        }
        Fixed(self, cycle)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_converges_in_one_cycle() {
        let a = CsrMatrix::<f64>::identity(6);
        let b = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let out = gmres_solve(&a, &b, &[0.0; 6], &IdentityPreconditioner, &GmresParams::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.restarts, 1);
        assert_eq!(out.inner_iterations, 1);
        for (x, y) in out.x.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn diagonal_system() {
        let d: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let a = CsrMatrix::from_diagonal(&d);
        let params = GmresParams {
            restart: 10,
            ..GmresParams::default()
        };
        let out = gmres_solve(&a, &[1.0; 10], &[0.0; 10], &IdentityPreconditioner, &params).unwrap();
        assert!(out.converged);
        assert_eq!(out.restarts, 1);
        for (x, di) in out.x.iter().zip(&d) {
            assert!((x - 1.0 / di).abs() < 1e-8);
        }
    }

    #[test]
    fn eigenvector_rhs_breaks_down_happily() {
        let a = CsrMatrix::from_diagonal(&[2.0, 3.0, 5.0]);
        let out = gmres_solve(&a, &[0.0, 3.0, 0.0], &[0.0; 3], &IdentityPreconditioner, &GmresParams::default())
            .unwrap();
        assert!(out.happy_breakdown);
        assert_eq!(out.inner_iterations, 1);
        assert_eq!(out.x, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let mut e = Vec::new();
        for i in 0..30 {
            e.push((i, (i + 1) % 30, 1.0));
        }
        let a = CsrMatrix::from_triplets(30, 30, e).unwrap();
        let mut b = vec![0.0; 30];
        b[0] = 1.0;
        let params = GmresParams {
            restart: 5,
            max_restarts: 3,
            tol: 1e-8,
        };
        let out = gmres_solve(&a, &b, &[0.0; 30], &IdentityPreconditioner, &params).unwrap();
        assert!(!out.converged);
        assert_eq!(out.restarts, 3);
    }

    #[test]
    fn nan_is_divergence() {
        let a = CsrMatrix::from_diagonal(&[1.0, f64::NAN]);
        let r = gmres_solve(&a, &[1.0, 1.0], &[0.0; 2], &IdentityPreconditioner, &GmresParams::default());
        assert!(matches!(r, Err(SolverError::Divergence { .. })));
    }

    #[test]
    fn zero_rhs() {
        let a = CsrMatrix::<f64>::identity(3);
        let out = gmres_solve(&a, &[0.0; 3], &[0.0; 3], &IdentityPreconditioner, &GmresParams::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.restarts, 0);
    }

    #[test]
    fn params_parse_aliases() {
        let p: GmresParams = serde_json::from_str(r#"{"m": 10, "MaxIt": 4, "tol": 1e-6}"#).unwrap();
        assert_eq!((p.restart, p.max_restarts, p.tol), (10, 4, 1e-6));
        assert!(GmresParams { restart: 0, ..p }.validate().is_err());
    }
}
