//! Dense vector kernels.
//!
//! Reductions split the input into `REDUCTION_CHUNK`-sized pieces, sum each
//! piece sequentially and then add the partial sums left to right. The chunk
//! layout is fixed, so results are bitwise identical for any worker count.

use rayon::prelude::*;

use crate::error::{check_len, Result};
use crate::parallel::{REDUCTION_CHUNK, ROW_GRAIN};
use crate::scalar::Scalar;

fn chunked_sum<T, F>(n: usize, f: F) -> T
where
    T: Scalar,
    F: Fn(std::ops::Range<usize>) -> T + Sync,
{
    if n <= REDUCTION_CHUNK {
        return f(0..n);
    }
    let nchunks = n.div_ceil(REDUCTION_CHUNK);
    let partials: Vec<T> = (0..nchunks)
        .into_par_iter()
        .map(|c| f(c * REDUCTION_CHUNK..((c + 1) * REDUCTION_CHUNK).min(n)))
        .collect();
    let mut acc = T::zero();
    for p in partials {
        acc += p;
    }
    acc
}

pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    check_len("dot", x.len(), y.len())?;
    Ok(chunked_sum(x.len(), |r| {
        let mut acc = T::zero();
        for i in r {
            acc += x[i] * y[i];
        }
        acc
    }))
}

pub fn norm2<T: Scalar>(x: &[T]) -> T {
    chunked_sum(x.len(), |r| {
        let mut acc = T::zero();
        for i in r {
            acc += x[i] * x[i];
        }
        acc
    })
    .sqrt()
}

/// `y <- alpha * x + y`
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) -> Result<()> {
    check_len("axpy", y.len(), x.len())?;
    y.par_iter_mut()
        .with_min_len(ROW_GRAIN)
        .zip(x.par_iter())
        .for_each(|(yi, &xi)| *yi += alpha * xi);
    Ok(())
}

/// `x <- alpha * x`
pub fn scale<T: Scalar>(alpha: T, x: &mut [T]) {
    x.par_iter_mut()
        .with_min_len(ROW_GRAIN)
        .for_each(|v| *v *= alpha);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parallel::with_workers;

    #[test]
    fn orthogonal_dot() {
        assert_eq!(dot(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn three_four_five() {
        assert_eq!(norm2(&[3.0f64, 4.0]), 5.0);
    }

    #[test]
    fn axpy_by_hand() {
        let mut y = vec![1.0, 0.0];
        axpy(2.0, &[1.0, 1.0], &mut y).unwrap();
        assert_eq!(y, vec![3.0, 2.0]);
    }

    #[test]
    fn length_mismatch() {
        assert!(dot(&[1.0], &[1.0, 2.0]).is_err());
        let mut y = vec![0.0; 3];
        assert!(axpy(1.0, &[1.0], &mut y).is_err());
    }

    #[test]
    fn reductions_bitwise_across_workers() {
        let n = 50_003;
        let x: Vec<f64> = (0..n).map(|i| ((i * 7919) % 1000) as f64 * 1e-3 - 0.37).collect();
        let y: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let d1 = with_workers(1, || dot(&x, &y).unwrap());
        let n1 = with_workers(1, || norm2(&x));
        for w in 2..=16 {
            let dw = with_workers(w, || dot(&x, &y).unwrap());
            let nw = with_workers(w, || norm2(&x));
            assert_eq!(d1.to_bits(), dw.to_bits(), "dot differs at {w} workers");
            assert_eq!(n1.to_bits(), nw.to_bits(), "norm differs at {w} workers");
        }
    }
}
