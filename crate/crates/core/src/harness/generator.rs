//! Synthetic three-unknown reservoir-like Jacobian sequences.
//!
//! Each cell carries (pressure, two saturations). Pressure rows are a
//! heterogeneous diffusion operator plus an accumulation term, saturation
//! rows are upwind convection plus a time term, and the saturation rows feed
//! back on pressure through mobility-weighted transmissibilities.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};
use crate::sparse::{BlockCsrMatrix, BlockSparse};

pub const BLOCK: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorParams {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub nsteps: usize,
    /// Relative per-step perturbation of the coefficient fields.
    pub drift: f64,
    pub seed: u64,
    /// Standard deviation of log-permeability.
    pub perm_sigma: f64,
    /// Vertical to horizontal permeability ratio.
    pub kz_ratio: f64,
    /// Accumulation term on the pressure diagonal.
    pub compressibility: f64,
    /// Porosity over time step on the saturation diagonals.
    pub time_factor: f64,
    /// Scale of the background Darcy velocity.
    pub flow: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            nx: 32,
            ny: 32,
            nz: 4,
            nsteps: 10,
            drift: 0.01,
            seed: 42,
            perm_sigma: 1.0,
            kz_ratio: 0.1,
            compressibility: 0.01,
            time_factor: 1.0,
            flow: 5.0,
        }
    }
}

impl GeneratorParams {
    pub fn cells(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 || self.nz == 0 || self.nsteps == 0 {
            return Err(SolverError::InvalidParameter(
                "grid dimensions and nsteps must be at least 1".into(),
            ));
        }
        if !(self.drift >= 0.0 && self.drift < 1.0) {
            return Err(SolverError::InvalidParameter("drift must lie in [0, 1)".into()));
        }
        Ok(())
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.ny + j) * self.nx + i
    }

    /// Face neighbours of a cell in ascending index order, with the
    /// direction axis (0 = x, 1 = y, 2 = z).
    pub fn neighbors(&self, cell: usize) -> Vec<(usize, usize)> {
        let i = cell % self.nx;
        let j = (cell / self.nx) % self.ny;
        let k = cell / (self.nx * self.ny);
        let mut out = Vec::with_capacity(6);
        if k > 0 {
            out.push((self.index(i, j, k - 1), 2));
        }
        if j > 0 {
            out.push((self.index(i, j - 1, k), 1));
        }
        if i > 0 {
            out.push((self.index(i - 1, j, k), 0));
        }
        if i + 1 < self.nx {
            out.push((self.index(i + 1, j, k), 0));
        }
        if j + 1 < self.ny {
            out.push((self.index(i, j + 1, k), 1));
        }
        if k + 1 < self.nz {
            out.push((self.index(i, j, k + 1), 2));
        }
        out
    }
}

struct Fields {
    perm: Vec<f64>,
    poro: Vec<f64>,
    mobility: [Vec<f64>; 2],
    pressure: Vec<f64>,
}

impl Fields {
    fn initial(p: &GeneratorParams, rng: &mut ChaCha8Rng) -> Self {
        let n = p.cells();
        let ln = LogNormal::new(0.0, p.perm_sigma.max(0.0)).expect("finite sigma");
        let perm = (0..n).map(|_| ln.sample(rng)).collect();
        let poro = (0..n).map(|_| rng.random_range(0.1..0.3)).collect();
        let mob_w = (0..n).map(|_| rng.random_range(0.3..0.7)).collect();
        let mob_o = (0..n).map(|_| rng.random_range(0.2..0.5)).collect();
        let pressure = (0..n)
            .map(|c| {
                let i = (c % p.nx) as f64;
                let j = ((c / p.nx) % p.ny) as f64;
                1.0 - (i + 0.3 * j) / (p.nx + p.ny) as f64
            })
            .collect();
        Self {
            perm,
            poro,
            mobility: [mob_w, mob_o],
            pressure,
        }
    }

    fn perturb(&mut self, drift: f64, rng: &mut ChaCha8Rng) {
        let mut step = |v: &mut Vec<f64>| {
            for x in v.iter_mut() {
                let xi: f64 = StandardNormal.sample(rng);
                *x *= 1.0 + drift * xi.clamp(-3.0, 3.0);
            }
        };
        step(&mut self.perm);
        step(&mut self.poro);
        step(&mut self.mobility[0]);
        step(&mut self.mobility[1]);
        step(&mut self.pressure);
    }
}

fn assemble(p: &GeneratorParams, f: &Fields) -> Result<BlockCsrMatrix<f64>> {
    let n = p.cells();
    let bb = BLOCK * BLOCK;
    let mut row_ptr = Vec::with_capacity(n + 1);
    row_ptr.push(0);
    let mut col_idx = Vec::with_capacity(7 * n);
    let mut values = Vec::with_capacity(7 * n * bb);
    for c in 0..n {
        let mut diag = [0.0; 9];
        diag[0] = p.compressibility * f.poro[c];
        diag[4] = p.time_factor * f.poro[c];
        diag[8] = p.time_factor * f.poro[c];
        diag[1] = 0.05 * f.poro[c];
        diag[2] = 0.05 * f.poro[c];
        let mut offs: Vec<(usize, [f64; 9])> = Vec::with_capacity(6);
        for (nb, axis) in p.neighbors(c) {
            let kz = if axis == 2 { p.kz_ratio } else { 1.0 };
            let t = kz * 2.0 * f.perm[c] * f.perm[nb] / (f.perm[c] + f.perm[nb]);
            let flux = p.flow * t * (f.pressure[c] - f.pressure[nb]);
            let mut blk = [0.0; 9];
            diag[0] += t;
            blk[0] = -t;
            for (a, mob) in f.mobility.iter().enumerate() {
                let row = a + 1;
                let lam = 0.5 * (mob[c] + mob[nb]);
                diag[row * BLOCK] += lam * t;
                blk[row * BLOCK] = -lam * t;
                if flux > 0.0 {
                    diag[row * BLOCK + row] += flux * mob[c];
                } else {
                    blk[row * BLOCK + row] = flux * mob[nb];
                }
            }
            offs.push((nb, blk));
        }
        let mut placed = false;
        for (nb, blk) in offs {
            if nb > c && !placed {
                col_idx.push(c);
                values.extend_from_slice(&diag);
                placed = true;
            }
            col_idx.push(nb);
            values.extend_from_slice(&blk);
        }
        if !placed {
            col_idx.push(c);
            values.extend_from_slice(&diag);
        }
        row_ptr.push(col_idx.len());
    }
    BlockCsrMatrix::new(BLOCK, n, n, row_ptr, col_idx, values)
}

/// Manufactured solution: pressure near one, saturations in (0.1, 0.9).
fn manufactured(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut x = Vec::with_capacity(n * BLOCK);
    for _ in 0..n {
        x.push(1.0 + 0.1 * rng.random_range(-1.0..1.0));
        x.push(rng.random_range(0.1..0.9));
        x.push(rng.random_range(0.1..0.9));
    }
    x
}

/// A system in the sequence with its manufactured solution.
#[derive(Debug, Clone)]
pub struct GeneratedSystem {
    pub matrix: Arc<BlockCsrMatrix<f64>>,
    pub rhs: Vec<f64>,
    pub solution: Vec<f64>,
}

/// Builds `nsteps` systems; with `drift = 0` all are identical.
pub fn generate_blackoil_like_sequence(p: &GeneratorParams) -> Result<Vec<GeneratedSystem>> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut fields = Fields::initial(p, &mut rng);
    let solution = manufactured(p.cells(), &mut rng);
    let mut out = Vec::with_capacity(p.nsteps);
    for step in 0..p.nsteps {
        if step > 0 && p.drift > 0.0 {
            fields.perturb(p.drift, &mut rng);
        }
        let a = assemble(p, &fields)?;
        let rhs = a.spmv(&solution)?;
        out.push(GeneratedSystem {
            matrix: Arc::new(a),
            rhs,
            solution: solution.clone(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(nsteps: usize, drift: f64) -> GeneratorParams {
        GeneratorParams {
            nx: 4,
            ny: 4,
            nz: 1,
            nsteps,
            drift,
            ..GeneratorParams::default()
        }
    }

    #[test]
    fn seeded_and_repeatable() {
        let a = generate_blackoil_like_sequence(&small(1, 0.0)).unwrap();
        let b = generate_blackoil_like_sequence(&small(1, 0.0)).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].matrix, b[0].matrix);
        assert_eq!(a[0].rhs, b[0].rhs);
    }

    #[test]
    fn zero_drift_repeats_system() {
        let s = generate_blackoil_like_sequence(&small(5, 0.0)).unwrap();
        assert!(s.windows(2).all(|w| w[0].matrix == w[1].matrix && w[0].rhs == w[1].rhs));
        let d = generate_blackoil_like_sequence(&small(2, 0.05)).unwrap();
        assert_ne!(d[0].matrix, d[1].matrix);
        assert_eq!(d[0].matrix.nnz(), d[1].matrix.nnz());
    }

    #[test]
    fn stencil_pattern() {
        let p = small(1, 0.0);
        let s = generate_blackoil_like_sequence(&p).unwrap();
        let a = &s[0].matrix;
        assert_eq!(a.dim(), 48);
        for c in 0..16 {
            let mut expect: Vec<usize> = p.neighbors(c).into_iter().map(|(n, _)| n).collect();
            expect.push(c);
            expect.sort_unstable();
            let rp = a.row_ptr();
            assert_eq!(&a.col_idx()[rp[c]..rp[c + 1]], expect.as_slice());
        }
        // interior cell of a 4x4 grid has four neighbours
        assert_eq!(p.neighbors(5).len(), 4);
    }

    #[test]
    fn pressure_block_is_symmetric_m_matrix() {
        let s = generate_blackoil_like_sequence(&small(1, 0.0)).unwrap();
        let app = s[0].matrix.component(0).unwrap();
        assert!(app.is_symmetric(1e-14));
        for i in 0..app.nrows() {
            let (cols, vals) = app.row(i);
            let off: f64 = cols.iter().zip(vals).filter(|(c, _)| **c != i).map(|(_, v)| -v).sum();
            assert!(app.get(i, i).unwrap() > off);
        }
    }

    #[test]
    fn rhs_matches_solution() {
        let s = generate_blackoil_like_sequence(&small(1, 0.0)).unwrap();
        let r = s[0].matrix.residual(&s[0].rhs, &s[0].solution).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn rejects_empty_grid() {
        let mut p = small(1, 0.0);
        p.nx = 0;
        assert!(generate_blackoil_like_sequence(&p).is_err());
    }
}
