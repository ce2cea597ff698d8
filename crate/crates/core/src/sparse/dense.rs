//! Small dense LU with partial pivoting, used for diagonal blocks and the
//! coarsest multigrid level.

use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct DenseLu<T> {
    n: usize,
    lu: Vec<T>,
    piv: Vec<usize>,
}

impl<T: Scalar> DenseLu<T> {
    /// Factors a row-major `n x n` matrix. Returns `None` when a pivot is
    /// exactly zero or not finite.
    pub fn factor(n: usize, a: &[T]) -> Option<Self> {
        assert_eq!(a.len(), n * n);
        let mut lu = a.to_vec();
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for r in k + 1..n {
                let v = lu[r * n + k].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == T::zero() || !best.is_finite() {
                return None;
            }
            piv[k] = p;
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
            }
            let d = lu[k * n + k];
            for r in k + 1..n {
                let f = lu[r * n + k] / d;
                lu[r * n + k] = f;
                if f != T::zero() {
                    for c in k + 1..n {
                        let u = lu[k * n + c];
                        lu[r * n + c] -= f * u;
                    }
                }
            }
        }
        Some(Self { n, lu, piv })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Solves in place; `x` holds the right-hand side on entry.
    pub fn solve_in_place(&self, x: &mut [T]) {
        solve_packed(self.n, &self.lu, &self.piv, x);
    }

    pub fn inverse(&self) -> Vec<T> {
        let n = self.n;
        let mut inv = vec![T::zero(); n * n];
        let mut col = vec![T::zero(); n];
        for j in 0..n {
            col.iter_mut().for_each(|v| *v = T::zero());
            col[j] = T::one();
            self.solve_in_place(&mut col);
            for i in 0..n {
                inv[i * n + j] = col[i];
            }
        }
        inv
    }
}

fn solve_packed<T: Scalar>(n: usize, lu: &[T], piv: &[usize], x: &mut [T]) {
    for k in 0..n {
        let p = piv[k];
        if p != k {
            x.swap(k, p);
        }
    }
    for i in 1..n {
        let mut acc = x[i];
        for c in 0..i {
            acc -= lu[i * n + c] * x[c];
        }
        x[i] = acc;
    }
    for i in (0..n).rev() {
        let mut acc = x[i];
        for c in i + 1..n {
            acc -= lu[i * n + c] * x[c];
        }
        x[i] = acc / lu[i * n + i];
    }
}

/// LU factors of every diagonal block of a block matrix, packed contiguously.
#[derive(Debug, Clone)]
pub struct BlockDiagFactors<T> {
    b: usize,
    lu: Vec<T>,
    piv: Vec<usize>,
}

impl<T: Scalar> BlockDiagFactors<T> {
    /// Factors each block; on failure returns the index of the first singular block.
    pub fn factor<'a, I>(b: usize, blocks: I) -> std::result::Result<Self, usize>
    where
        I: IntoIterator<Item = &'a [T]>,
    {
        let mut lu = Vec::new();
        let mut piv = Vec::new();
        for (i, blk) in blocks.into_iter().enumerate() {
            let f = DenseLu::factor(b, blk).ok_or(i)?;
            lu.extend_from_slice(&f.lu);
            piv.extend_from_slice(&f.piv);
        }
        Ok(Self { b, lu, piv })
    }

    pub fn len(&self) -> usize {
        if self.b == 0 {
            0
        } else {
            self.piv.len() / self.b
        }
    }

    pub fn is_empty(&self) -> bool {
        self.piv.is_empty()
    }

    #[inline]
    pub fn solve(&self, i: usize, x: &mut [T]) {
        let b = self.b;
        if b == 1 {
            x[0] /= self.lu[i];
            return;
        }
        solve_packed(b, &self.lu[i * b * b..(i + 1) * b * b], &self.piv[i * b..(i + 1) * b], x);
    }
}
