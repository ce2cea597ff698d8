use ascpr::amg::{build_hierarchy, AmgParams, CycleKind};
use ascpr::sparse::{BlockSparse, CsrMatrix};

fn poisson2d(m: usize) -> CsrMatrix<f64> {
    let idx = |i: usize, j: usize| i * m + j;
    let mut e = Vec::new();
    for i in 0..m {
        for j in 0..m {
            let k = idx(i, j);
            e.push((k, k, 4.0));
            if i > 0 {
                e.push((k, idx(i - 1, j), -1.0));
            }
            if i + 1 < m {
                e.push((k, idx(i + 1, j), -1.0));
            }
            if j > 0 {
                e.push((k, idx(i, j - 1), -1.0));
            }
            if j + 1 < m {
                e.push((k, idx(i, j + 1), -1.0));
            }
        }
    }
    CsrMatrix::from_triplets(m * m, m * m, e).unwrap()
}

fn rhs(n: usize) -> Vec<f64> {
    (0..n).map(|i| ((i * 37 % 101) as f64) / 50.0 - 1.0).collect()
}

#[test]
fn poisson32_v11_reaches_1e6_within_25_cycles() {
    let a = poisson2d(32);
    let h = build_hierarchy(&a, &AmgParams::default()).unwrap();
    assert!(h.galerkin_errors().unwrap().iter().all(|g| *g <= 1e-13));
    let b = rhs(a.dim());
    let mut x = vec![0.0; a.dim()];
    let hist = h.iterate(&b, &mut x, 25, CycleKind::V).unwrap();
    let hit = hist.iter().position(|r| *r <= 1e-6 * hist[0]);
    assert!(hit.is_some_and(|k| k <= 25), "{hit:?}");
}

#[test]
fn k_cycle_beats_v_cycle() {
    let a = poisson2d(48);
    let params = AmgParams {
        coarsest_size: 50,
        ..AmgParams::default()
    };
    let h = build_hierarchy(&a, &params).unwrap();
    let b = rhs(a.dim());
    let reduction = |kind| {
        let mut x = vec![0.0; a.dim()];
        let hist = h.iterate(&b, &mut x, 10, kind).unwrap();
        hist[10] / hist[0]
    };
    let v = reduction(CycleKind::V);
    let k = reduction(CycleKind::K);
    assert!(k < v, "K {k:e} vs V {v:e}");
}

#[test]
fn hierarchy_sizes_roughly_halve() {
    let a = poisson2d(40);
    let h = build_hierarchy(&a, &AmgParams::default()).unwrap();
    let sizes: Vec<usize> = h.levels().iter().map(|l| l.size()).collect();
    assert!(*sizes.last().unwrap() <= 200);
    for w in sizes.windows(2) {
        assert!(w[1] * 10 <= w[0] * 6, "{sizes:?}");
    }
    let s = h.summary();
    assert!(s.operator_complexity < 2.5 && s.grid_complexity < 2.2, "{s:?}");
}
