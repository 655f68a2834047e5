//! Exact rectangular linear assignment.
//!
//! [`solve_assignment`] runs a shortest augmenting path Hungarian method on
//! the rectangular matrix (transposed so rows never outnumber columns) and
//! then walks the tight subgraph of the dual certificate to pick the
//! lexicographically smallest optimal pair list. [`enumerate_assignment`] is
//! the brute-force reference used by the tests.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::scalar::{sum, Scalar};

/// Dense `rows x cols` matrix of finite costs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> CostMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        if let Some(k) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("cost entry ({}, {})", k / cols.max(1), k % cols.max(1))));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch { expected: cols, found: bad.len() });
        }
        Self::new(rows.len(), cols, rows.iter().flatten().copied().collect())
    }

    /// Builds from a closure; panics are the caller's business.
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        Self { rows: self.cols, cols: self.rows, data }
    }

    fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |a, x| a.max(x.abs()))
    }

    /// Sum of the entries at `pairs`, in the given order.
    pub fn cost_of(&self, pairs: &[(usize, usize)]) -> T {
        sum(pairs.iter().map(|&(i, j)| self.get(i, j)))
    }

    fn with_entry(&self, i: usize, j: usize, value: T) -> Self {
        let mut m = self.clone();
        m.data[i * self.cols + j] = value;
        m
    }
}

/// A matching of all `min(rows, cols)` indices of the smaller side, listed
/// by ascending row.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment<T> {
    pub pairs: Vec<(usize, usize)>,
    pub total_cost: T,
}

impl<T: Scalar> Assignment<T> {
    fn empty() -> Self {
        Self { pairs: Vec::new(), total_cost: T::zero() }
    }
}

/// Something that can solve a [`CostMatrix`]. The metric code is written
/// against this trait so the self-check can swap in a deliberately broken
/// solver.
pub trait AssignmentSolver<T: Scalar>: Sync {
    fn solve(&self, costs: &CostMatrix<T>) -> Assignment<T>;
}

/// The exact solver behind [`solve_assignment`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactSolver;

impl<T: Scalar> AssignmentSolver<T> for ExactSolver {
    fn solve(&self, costs: &CostMatrix<T>) -> Assignment<T> {
        solve_assignment(costs)
    }
}

/// Hungarian method (shortest augmenting paths with potentials) for
/// `rows <= cols`. Returns the column of each row and the dual potentials
/// `u` (rows) and `v` (columns) with `c_ij - u_i - v_j >= 0`, equality on
/// matched pairs, and `v_j <= 0` with `v_j = 0` on unmatched columns.
fn hungarian<T: Scalar>(c: &CostMatrix<T>) -> (Vec<usize>, Vec<T>, Vec<T>) {
    let (n, m) = (c.rows, c.cols);
    debug_assert!(n <= m);
    let inf = T::infinity();
    // 1-based; index 0 is the virtual source
    let mut u = vec![T::zero(); n + 1];
    let mut v = vec![T::zero(); m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![inf; m + 1];
    let mut used = vec![false; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        minv.iter_mut().for_each(|x| *x = inf);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = c.get(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] = u[owner[j]] + delta;
                    v[j] = v[j] - delta;
                } else {
                    minv[j] = minv[j] - delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![usize::MAX; n];
    for j in 1..=m {
        if owner[j] != 0 {
            row_to_col[owner[j] - 1] = j - 1;
        }
    }
    (row_to_col, u[1..].to_vec(), v[1..].to_vec())
}

/// Minimum-cost matching of all rows of the smaller side into the larger
/// side. Among optimal matchings the lexicographically smallest pair list
/// (ordered by row) is returned.
pub fn solve_assignment<T: Scalar>(costs: &CostMatrix<T>) -> Assignment<T> {
    let (m, n) = (costs.rows, costs.cols);
    if m == 0 || n == 0 {
        return Assignment::empty();
    }
    let transposed = m > n;
    let (matching, row_pot, col_pot) = if transposed {
        let (s_to_l, u, v) = hungarian(&costs.transpose());
        let mut row_to_col = vec![usize::MAX; m];
        for (j, &i) in s_to_l.iter().enumerate() {
            row_to_col[i] = j;
        }
        (row_to_col, v, u)
    } else {
        hungarian(costs)
    };
    let row_to_col = LexTieBreak::new(costs, &matching, &row_pot, &col_pot).run();
    let pairs: Vec<(usize, usize)> =
        row_to_col.iter().enumerate().filter(|&(_, &j)| j < n).map(|(i, &j)| (i, j)).collect();
    let total_cost = costs.cost_of(&pairs);
    Assignment { pairs, total_cost }
}

/// Square view of the problem: the smaller side is padded with dummy nodes
/// that may take any larger-side node whose dual potential is zero. Perfect
/// matchings over tight edges are exactly the optimal assignments.
struct LexTieBreak {
    m: usize,
    n: usize,
    k: usize,
    tight: Vec<bool>,
    row_match: Vec<usize>,
    col_match: Vec<usize>,
    row_fixed: Vec<bool>,
    col_fixed: Vec<bool>,
}

impl LexTieBreak {
    fn new<T: Scalar>(costs: &CostMatrix<T>, row_to_col: &[usize], row_pot: &[T], col_pot: &[T]) -> Self {
        let (m, n) = (costs.rows, costs.cols);
        let k = m.max(n);
        let eps = T::epsilon() * T::lit(16.0);
        let scale = costs.max_abs().max(T::one());
        let zero_pot = |p: T| p >= -eps * scale;
        let mut tight = vec![false; k * k];
        for i in 0..k {
            for j in 0..k {
                tight[i * k + j] = match (i < m, j < n) {
                    (true, true) => {
                        let rc = costs.get(i, j) - row_pot[i] - col_pot[j];
                        rc <= eps * (costs.get(i, j).abs() + row_pot[i].abs() + col_pot[j].abs())
                    }
                    (false, true) => zero_pot(col_pot[j]),
                    (true, false) => zero_pot(row_pot[i]),
                    (false, false) => false,
                };
            }
        }
        let mut row_match = vec![usize::MAX; k];
        let mut col_match = vec![usize::MAX; k];
        for (i, &j) in row_to_col.iter().enumerate() {
            if j < n {
                row_match[i] = j;
                col_match[j] = i;
                tight[i * k + j] = true;
            }
        }
        // unmatched larger-side nodes go to dummies in order
        let mut next_dummy = m.min(n);
        if m < n {
            for j in 0..n {
                if col_match[j] == usize::MAX {
                    col_match[j] = next_dummy;
                    row_match[next_dummy] = j;
                    tight[next_dummy * k + j] = true;
                    next_dummy += 1;
                }
            }
            // dummies are interchangeable: copy the union of their rows
            for j in 0..n {
                if (m..k).any(|d| tight[d * k + j]) {
                    (m..k).for_each(|d| tight[d * k + j] = true);
                }
            }
        } else if m > n {
            for i in 0..m {
                if row_match[i] == usize::MAX {
                    row_match[i] = next_dummy;
                    col_match[next_dummy] = i;
                    tight[i * k + next_dummy] = true;
                    next_dummy += 1;
                }
            }
            for i in 0..m {
                if (n..k).any(|d| tight[i * k + d]) {
                    (n..k).for_each(|d| tight[i * k + d] = true);
                }
            }
        }
        Self {
            m,
            n,
            k,
            tight,
            row_match,
            col_match,
            row_fixed: vec![false; k],
            col_fixed: vec![false; k],
        }
    }

    fn run(mut self) -> Vec<usize> {
        for i in 0..self.m {
            let current = self.row_match[i];
            let limit = current.min(self.n);
            for j in 0..limit {
                if !self.col_fixed[j] && self.tight[i * self.k + j] && self.try_force(i, j) {
                    break;
                }
            }
            self.row_fixed[i] = true;
            self.col_fixed[self.row_match[i]] = true;
        }
        self.row_match.truncate(self.m);
        self.row_match
    }

    /// Rematches row `i` to column `j` by an alternating path over tight
    /// edges among the unfixed nodes, if one exists.
    fn try_force(&mut self, i: usize, j: usize) -> bool {
        let k = self.k;
        let start = self.col_match[j];
        let target = self.row_match[i];
        let mut via = vec![usize::MAX; k];
        let mut queue = VecDeque::from([start]);
        while let Some(r) = queue.pop_front() {
            for c in 0..k {
                if c == j || self.col_fixed[c] || via[c] != usize::MAX || !self.tight[r * k + c] {
                    continue;
                }
                via[c] = r;
                if c == target {
                    let mut c = target;
                    loop {
                        let r = via[c];
                        let next = self.row_match[r];
                        self.row_match[r] = c;
                        self.col_match[c] = r;
                        if r == start {
                            break;
                        }
                        c = next;
                    }
                    self.row_match[i] = j;
                    self.col_match[j] = i;
                    return true;
                }
                queue.push_back(self.col_match[c]);
            }
        }
        false
    }
}

/// Largest side accepted by [`enumerate_assignment`].
pub const ENUMERATION_LIMIT: usize = 8;

/// Exhaustive reference: tries every injection of the smaller side into the
/// larger one and returns the lexicographically smallest optimal pair list.
pub fn enumerate_assignment<T: Scalar>(costs: &CostMatrix<T>) -> Result<Assignment<T>> {
    let (m, n) = (costs.rows, costs.cols);
    let k = m.max(n);
    if k > ENUMERATION_LIMIT {
        return Err(Error::SizeBound { what: "assignment enumeration", found: k, limit: ENUMERATION_LIMIT });
    }
    if m == 0 || n == 0 {
        return Ok(Assignment::empty());
    }
    let mut candidates: Vec<(T, Vec<(usize, usize)>)> = Vec::new();
    let small = m.min(n);
    let large = k;
    let mut chosen = Vec::with_capacity(small);
    let mut used = vec![false; large];
    injections(small, large, &mut chosen, &mut used, &mut |inj: &[usize]| {
        let mut pairs: Vec<(usize, usize)> = if m <= n {
            inj.iter().enumerate().map(|(i, &j)| (i, j)).collect()
        } else {
            inj.iter().enumerate().map(|(j, &i)| (i, j)).collect()
        };
        pairs.sort_unstable();
        candidates.push((costs.cost_of(&pairs), pairs));
    });
    let best = candidates.iter().fold(T::infinity(), |a, (c, _)| a.min(*c));
    let tol = T::epsilon() * T::lit(16.0 * k as f64) * costs.max_abs().max(T::one());
    let (total_cost, pairs) = candidates
        .into_iter()
        .filter(|(c, _)| *c <= best + tol)
        .min_by(|a, b| a.1.cmp(&b.1))
        .expect("at least one injection");
    Ok(Assignment { pairs, total_cost })
}

fn injections(
    small: usize,
    large: usize,
    chosen: &mut Vec<usize>,
    used: &mut [bool],
    visit: &mut impl FnMut(&[usize]),
) {
    if chosen.len() == small {
        visit(chosen);
        return;
    }
    for j in 0..large {
        if !used[j] {
            used[j] = true;
            chosen.push(j);
            injections(small, large, chosen, used, visit);
            chosen.pop();
            used[j] = false;
        }
    }
}

/// Cost gap between the best assignment and the best one that differs from
/// it, found by forbidding each matched pair in turn. `None` when no other
/// assignment exists.
pub fn second_best_gap<T: Scalar>(
    costs: &CostMatrix<T>,
    best: &Assignment<T>,
    solver: &dyn AssignmentSolver<T>,
) -> Option<T> {
    let k = costs.rows.max(costs.cols);
    let forbidden = T::lit(4.0 * (k as f64 + 1.0)) * (costs.max_abs() + T::one());
    best.pairs
        .iter()
        .filter_map(|&(i, j)| {
            let alt = solver.solve(&costs.with_entry(i, j, forbidden));
            (!alt.pairs.contains(&(i, j))).then(|| costs.cost_of(&alt.pairs) - best.total_cost)
        })
        .reduce(T::min)
}
