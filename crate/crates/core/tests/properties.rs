use proptest::prelude::*;

use ascpr::amg::{galerkin_product, pairwise_aggregate};
use ascpr::coloring::{color_matrix, verify_partition};
use ascpr::ilu::{bilu0_factorize, pattern_reconstruction_error, PivotPolicy};
use ascpr::parallel::with_workers;
use ascpr::smoothers::{pgs_scm_sweep, GaussSeidel};
use ascpr::sparse::{BlockCsrMatrix, BlockSparse, CsrMatrix};

fn build(n: usize, entries: &[(usize, usize, f64)], dominant: bool) -> CsrMatrix<f64> {
    let mut trip: Vec<(usize, usize, f64)> = entries
        .iter()
        .map(|&(i, j, v)| (i % n, j % n, v))
        .filter(|(i, j, _)| i != j)
        .collect();
    let mut rowsum = vec![0.0; n];
    for (i, _, v) in &trip {
        rowsum[*i] += f64::abs(*v);
    }
    for (i, s) in rowsum.into_iter().enumerate() {
        trip.push((i, i, if dominant { 2.0 * s + 1.0 } else { 1.0 }));
    }
    CsrMatrix::from_triplets_summed(n, n, trip).unwrap()
}

fn matrix(dominant: bool) -> impl Strategy<Value = CsrMatrix<f64>> {
    (1usize..120).prop_flat_map(move |n| {
        prop::collection::vec((0..n, 0..n, -1.0f64..1.0), 0..6 * n).prop_map(move |e| build(n, &e, dominant))
    })
}

fn vector(n: usize, seed: u64) -> Vec<f64> {
    (0..n).map(|i| (((i as u64 + 1) * (seed + 7919)) % 997) as f64 / 500.0 - 1.0).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partitions_satisfy_every_check(a in matrix(false), theta in 0.0f64..=1.0) {
        let p = color_matrix(&a, theta).unwrap();
        let rep = verify_partition(&a, theta, &p).unwrap();
        prop_assert!(rep.all_passed(), "{:?}", rep.checks);
    }

    #[test]
    fn pgs_scm_is_sequential_gs_in_color_order(a in matrix(true), theta in 0.0f64..=1.0, seed in 0u64..100) {
        let p = color_matrix(&a, theta).unwrap();
        let rhs = vector(a.nrows(), seed);
        let x0 = vector(a.nrows(), seed + 1);
        let mut oracle = x0.clone();
        GaussSeidel::new(&a).unwrap().sweep_in_order(&a, &rhs, &mut oracle, &p.ordering()).unwrap();
        for w in [1, 3] {
            let x = with_workers(w, || pgs_scm_sweep(&a, &rhs, &x0, &p)).unwrap();
            prop_assert!(x.iter().zip(&oracle).all(|(u, v)| u.to_bits() == v.to_bits()));
        }
    }

    #[test]
    fn bilu_reconstructs_pattern_and_solves_deterministically(a in matrix(true), b in 1usize..4, seed in 0u64..100) {
        let a = BlockCsrMatrix::from_scalar(&a, 1).unwrap();
        let scalar = a.to_scalar();
        let n = scalar.nrows();
        // tile into b x b blocks of the same pattern
        let mut trip = Vec::new();
        for (i, j, v) in scalar.triplets() {
            let mut blk = vec![0.0; b * b];
            for r in 0..b {
                for c in 0..b {
                    blk[r * b + c] = if r == c { v } else { 0.05 * v.abs() };
                }
            }
            trip.push((i, j, blk));
        }
        let a = BlockCsrMatrix::from_block_triplets(b, n, n, trip).unwrap();
        let f = bilu0_factorize(&a, PivotPolicy::Error).unwrap();
        prop_assert!(pattern_reconstruction_error(&a, &f) <= 1e-12);
        let r = vector(a.dim(), seed);
        let reference = f.apply_sequential(&r).unwrap();
        for w in [1, 2, 8] {
            let z = with_workers(w, || f.apply(&r)).unwrap();
            prop_assert!(z.iter().zip(&reference).all(|(u, v)| u.to_bits() == v.to_bits()));
        }
    }

    #[test]
    fn aggregation_covers_and_galerkin_matches(a in matrix(true), theta in 0.0f64..0.5) {
        let agg = pairwise_aggregate(&a, theta).unwrap();
        let members = agg.members();
        let mut seen = vec![0usize; a.nrows()];
        for m in &members {
            prop_assert!(!m.is_empty() && m.len() <= 2);
            for &v in m {
                seen[v] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        let p = agg.prolongation::<f64>();
        let explicit = p.transpose().matmul(&a).unwrap().matmul(&p).unwrap();
        let coarse = galerkin_product(&a, &agg).unwrap();
        let scale = a.triplets().map(|(_, _, v)| v.abs()).fold(1.0, f64::max);
        let de = explicit.to_dense();
        let dc = coarse.to_dense();
        prop_assert!(de.iter().zip(&dc).all(|(x, y)| (x - y).abs() <= 1e-13 * scale));
    }

    #[test]
    fn transpose_is_an_involution(a in matrix(false)) {
        prop_assert_eq!(a.transpose().transpose(), a);
    }
}
