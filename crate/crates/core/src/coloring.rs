//! Strong-connection graph and greedy vertex grouping for multi-color
//! Gauss-Seidel.
//!
//! An off-diagonal entry `a_ij` is strong when `|a_ij| > theta * sum_k |a_ik|`
//! (the row sum includes the diagonal). Vertices are split into groups that
//! are independent in the strong graph: each round runs a greedy
//! maximal-independent-set pass that prefers the "second circle" of already
//! accepted vertices and, among candidates, the largest strong degree.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::error::{Result, SolverError};
use crate::scalar::Scalar;
use crate::sparse::{BlockSparse, CsrMatrix};

/// Pattern-only matrix of strong connections. The diagonal is never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct StrongConnectionMatrix {
    n: usize,
    theta: f64,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl StrongConnectionMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Number of strong edges (directed).
    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    /// Influence value `|S_i|`.
    pub fn degree(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&j).is_ok()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.neighbors(i).iter().all(|&j| self.contains(j, i)))
    }

    /// `S | S^T`.
    pub fn symmetrized(&self) -> Self {
        let mut adj: Vec<Vec<usize>> = (0..self.n).map(|i| self.neighbors(i).to_vec()).collect();
        for i in 0..self.n {
            for &j in self.neighbors(i) {
                if !self.contains(j, i) {
                    adj[j].push(i);
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for mut row in adj {
            row.sort_unstable();
            col_idx.extend(row);
            row_ptr.push(col_idx.len());
        }
        Self {
            n: self.n,
            theta: self.theta,
            row_ptr,
            col_idx,
        }
    }
}

/// Builds `S(A, theta)`. Block matrices are reduced to the scalar matrix of
/// block Frobenius norms first.
pub fn strong_connections<T, M>(a: &M, theta: f64) -> Result<StrongConnectionMatrix>
where
    T: Scalar,
    M: BlockSparse<T>,
{
    if !(0.0..=1.0).contains(&theta) || theta.is_nan() {
        return Err(SolverError::InvalidParameter(format!(
            "strength threshold {theta} outside [0, 1]"
        )));
    }
    if a.block_rows() != a.block_cols() {
        return Err(SolverError::InvalidMatrix("strong connections need a square matrix".into()));
    }
    let n = a.block_rows();
    let b = a.block_size();
    let rp = a.row_ptr();
    let ci = a.col_idx();
    let magnitude = |k: usize| -> T {
        if b == 1 {
            a.values()[k].abs()
        } else {
            a.block(k).iter().map(|v| *v * *v).sum::<T>().sqrt()
        }
    };
    let th = T::lit(theta);
    let rows: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .with_min_len(256)
        .map(|i| {
            let mut sum = T::zero();
            for k in rp[i]..rp[i + 1] {
                sum += magnitude(k);
            }
            let bound = th * sum;
            (rp[i]..rp[i + 1])
                .filter(|&k| ci[k] != i && magnitude(k) > bound)
                .map(|k| ci[k])
                .collect()
        })
        .collect();
    let mut row_ptr = Vec::with_capacity(n + 1);
    row_ptr.push(0);
    let mut col_idx = Vec::new();
    for r in rows {
        col_idx.extend(r);
        row_ptr.push(col_idx.len());
    }
    Ok(StrongConnectionMatrix {
        n,
        theta,
        row_ptr,
        col_idx,
    })
}

/// Ordered disjoint vertex groups. Vertices inside a group are kept in
/// ascending order, which is also their in-color update order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorPartition {
    groups: Vec<Vec<usize>>,
    vertex_color: Vec<usize>,
}

impl ColorPartition {
    /// Validated construction: every vertex in `0..n` exactly once.
    pub fn from_groups(groups: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let p = Self::from_groups_unchecked(groups, n);
        let mut count = vec![0usize; n];
        for g in &p.groups {
            if g.is_empty() {
                return Err(SolverError::InvalidParameter("empty color group".into()));
            }
            for &v in g {
                if v >= n {
                    return Err(SolverError::InvalidParameter(format!("vertex {v} out of range")));
                }
                count[v] += 1;
            }
        }
        if let Some(v) = count.iter().position(|&c| c != 1) {
            return Err(SolverError::InvalidParameter(format!(
                "vertex {v} appears {} times",
                count[v]
            )));
        }
        Ok(p)
    }

    /// Keeps the groups as given (sorted within each group). Out-of-range
    /// vertices are retained; the inverse map records the last group seen and
    /// `usize::MAX` for vertices never seen. Intended for checking foreign
    /// partitions with [`verify_partition`].
    pub fn from_groups_unchecked(mut groups: Vec<Vec<usize>>, n: usize) -> Self {
        let mut vertex_color = vec![usize::MAX; n];
        for (c, g) in groups.iter_mut().enumerate() {
            g.sort_unstable();
            for &v in g.iter() {
                if v < n {
                    vertex_color[v] = c;
                }
            }
        }
        Self {
            groups,
            vertex_color,
        }
    }

    /// One group holding every vertex in ascending order.
    pub fn single(n: usize) -> Self {
        Self {
            groups: if n == 0 { vec![] } else { vec![(0..n).collect()] },
            vertex_color: vec![0; n],
        }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn num_colors(&self) -> usize {
        self.groups.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_color.len()
    }

    /// Zero-based color of vertex `v`.
    pub fn color_of(&self, v: usize) -> usize {
        self.vertex_color[v]
    }

    /// Concatenated group order: position `p` holds the vertex updated p-th.
    pub fn ordering(&self) -> Vec<usize> {
        self.groups.iter().flatten().copied().collect()
    }

    /// One line per color, space-separated vertex indices.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        for g in &self.groups {
            let line: Vec<String> = g.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    /// Reads the dump format for an `n`-vertex graph. Structure is not
    /// validated beyond parsing; see [`verify_partition`].
    pub fn read_from<R: BufRead>(r: R, n: usize) -> Result<Self> {
        let mut groups = Vec::new();
        for (no, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let g = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| SolverError::Parse {
                        line: no + 1,
                        message: format!("invalid vertex {t:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            groups.push(g);
        }
        Ok(Self::from_groups_unchecked(groups, n))
    }
}

/// Working sets of one splitting round, with epoch-stamped membership.
///
/// `undetermined` is V, `accepted` is W, `deferred` is W-bar and the heap is
/// the frontier W-hat. Stamps are compared against `epoch` so that starting a
/// new round costs nothing.
#[derive(Debug, Clone)]
pub struct SplitState {
    epoch: u32,
    in_v: Vec<u32>,
    in_w: Vec<u32>,
    in_frontier: Vec<u32>,
    influence: Vec<usize>,
}

impl SplitState {
    pub fn new(s: &StrongConnectionMatrix) -> Self {
        let n = s.n();
        Self {
            epoch: 0,
            in_v: vec![0; n],
            in_w: vec![0; n],
            in_frontier: vec![0; n],
            influence: (0..n).map(|i| s.degree(i)).collect(),
        }
    }

    pub fn influence(&self, i: usize) -> usize {
        self.influence[i]
    }
}

/// One greedy splitting pass over `v`: returns `(W, W_bar)` with `W`
/// independent in `s` and `W ∪ W_bar = v`.
///
/// Candidates come from the frontier while it is nonempty, otherwise from
/// all of `v`; the largest influence wins and ties go to the lowest index.
pub fn vertices_splitting(
    state: &mut SplitState,
    s: &StrongConnectionMatrix,
    v: &[usize],
) -> (Vec<usize>, Vec<usize>) {
    state.epoch = state.epoch.checked_add(1).unwrap_or_else(|| {
        state.in_v.fill(0);
        state.in_w.fill(0);
        state.in_frontier.fill(0);
        1
    });
    let epoch = state.epoch;
    for &i in v {
        state.in_v[i] = epoch;
    }
    let mut scan: Vec<usize> = v.to_vec();
    scan.sort_unstable_by_key(|&i| (Reverse(state.influence[i]), i));
    let mut cursor = 0usize;
    let mut frontier: BinaryHeap<(usize, Reverse<usize>)> = BinaryHeap::new();

    let mut w = Vec::new();
    let mut w_bar = Vec::new();

    loop {
        let mut pick = None;
        while let Some((_, Reverse(i))) = frontier.pop() {
            if state.in_v[i] == epoch {
                pick = Some(i);
                break;
            }
        }
        if pick.is_none() {
            while cursor < scan.len() {
                let i = scan[cursor];
                cursor += 1;
                if state.in_v[i] == epoch {
                    pick = Some(i);
                    break;
                }
            }
        }
        let Some(i) = pick else { break };
        state.in_v[i] = 0;

        let independent = s.neighbors(i).iter().all(|&j| state.in_w[j] != epoch);
        if !independent {
            w_bar.push(i);
            continue;
        }
        state.in_w[i] = epoch;
        w.push(i);
        for &k in s.neighbors(i) {
            if state.in_v[k] == epoch {
                state.in_v[k] = 0;
                w_bar.push(k);
            }
        }
        // second circle: undetermined strong neighbours of strong neighbours
        for &k in s.neighbors(i) {
            for &j in s.neighbors(k) {
                if state.in_v[j] == epoch && state.in_frontier[j] != epoch {
                    state.in_frontier[j] = epoch;
                    frontier.push((state.influence[j], Reverse(j)));
                }
            }
        }
    }
    (w, w_bar)
}

/// Repeats [`vertices_splitting`] on the deferred set until every vertex has
/// a color. `s` should be symmetric; see [`strong_connections`] and
/// [`StrongConnectionMatrix::symmetrized`].
pub fn vertices_grouping(s: &StrongConnectionMatrix) -> ColorPartition {
    let n = s.n();
    let mut state = SplitState::new(s);
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut groups = Vec::new();
    while !remaining.is_empty() {
        let (w, w_bar) = vertices_splitting(&mut state, s, &remaining);
        debug_assert!(!w.is_empty());
        groups.push(w);
        remaining = w_bar;
    }
    ColorPartition::from_groups_unchecked(groups, n)
}

/// Strong connections (symmetrized) followed by grouping.
pub fn color_matrix<T, M>(a: &M, theta: f64) -> Result<ColorPartition>
where
    T: Scalar,
    M: BlockSparse<T>,
{
    let s = strong_connections(a, theta)?.symmetrized();
    Ok(vertices_grouping(&s))
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct PartitionReport {
    pub num_colors: usize,
    pub max_strong_degree: usize,
    pub checks: Vec<CheckResult>,
}

impl PartitionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn check(name: &'static str, failure: Option<String>) -> CheckResult {
    CheckResult {
        name,
        passed: failure.is_none(),
        detail: failure.unwrap_or_else(|| "ok".into()),
    }
}

/// Checks a partition against `A` and `theta`: cover, disjointness,
/// strong-graph independence, the `max|S_i| + 1` color bound, diagonal
/// principal blocks and `c <= n`. Degrees are those of the symmetrized graph.
pub fn verify_partition<T, M>(a: &M, theta: f64, partition: &ColorPartition) -> Result<PartitionReport>
where
    T: Scalar,
    M: BlockSparse<T>,
{
    let n = a.block_rows();
    let s = strong_connections(a, theta)?.symmetrized();
    let mut count = vec![0usize; n];
    let mut out_of_range = None;
    for g in partition.groups() {
        for &v in g {
            if v < n {
                count[v] += 1;
            } else if out_of_range.is_none() {
                out_of_range = Some(v);
            }
        }
    }
    let cover = match (out_of_range, count.iter().position(|&c| c == 0)) {
        (Some(v), _) => Some(format!("vertex {v} outside 0..{n}")),
        (None, Some(v)) => Some(format!("vertex {v} has no color")),
        (None, None) => None,
    };
    let disjoint = count
        .iter()
        .position(|&c| c > 1)
        .map(|v| format!("vertex {v} appears in {} groups", count[v]));

    let mut color = vec![usize::MAX; n];
    for (c, g) in partition.groups().iter().enumerate() {
        for &v in g {
            if v < n && color[v] == usize::MAX {
                color[v] = c;
            }
        }
    }
    let mut independent = None;
    'outer: for (c, g) in partition.groups().iter().enumerate() {
        for &v in g.iter().filter(|&&v| v < n) {
            for &j in s.neighbors(v) {
                if count[j] > 0 && partition.groups()[c].binary_search(&j).is_ok() {
                    independent = Some(format!("strong edge ({v}, {j}) inside color {c}"));
                    break 'outer;
                }
            }
        }
    }

    let c = partition.num_colors();
    let max_deg = s.max_degree();
    let bound = (c > max_deg + 1).then(|| format!("{c} colors exceed max|S_i| + 1 = {}", max_deg + 1));

    // principal block A[V_l, V_l]: off-diagonal entries must vanish (theta = 0)
    // or be weak (theta > 0)
    let rp = a.row_ptr();
    let ci = a.col_idx();
    let mut diagonal_blocks = None;
    'rows: for i in 0..n {
        if color[i] == usize::MAX {
            continue;
        }
        for k in rp[i]..rp[i + 1] {
            let j = ci[k];
            if j == i || color[j] != color[i] {
                continue;
            }
            let nonzero = a.block(k).iter().any(|v| *v != T::zero());
            let offending = if theta == 0.0 { nonzero } else { s.contains(i, j) };
            if offending {
                diagonal_blocks = Some(format!(
                    "principal block of color {} has off-diagonal entry ({i}, {j})",
                    color[i]
                ));
                break 'rows;
            }
        }
    }

    let termination = if c > n.max(1) {
        Some(format!("{c} colors for {n} vertices"))
    } else {
        partition
            .groups()
            .iter()
            .position(|g| g.is_empty())
            .map(|p| format!("group {p} is empty"))
    };

    Ok(PartitionReport {
        num_colors: c,
        max_strong_degree: max_deg,
        checks: vec![
            check("cover", cover),
            check("disjoint", disjoint),
            check("independent", independent),
            check("color_bound", bound),
            check("diagonal_blocks", diagonal_blocks),
            check("termination", termination),
        ],
    })
}

/// Helper for tests and tools: the principal submatrix of each color group.
pub fn group_submatrices<T: Scalar>(a: &CsrMatrix<T>, p: &ColorPartition) -> Result<Vec<CsrMatrix<T>>> {
    p.groups().iter().map(|g| a.principal_submatrix(g)).collect()
}
