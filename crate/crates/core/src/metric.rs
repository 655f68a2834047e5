//! The probabilistic GOSPA metric between multi-Bernoulli densities.

use std::cmp::Ordering;

use crate::assignment::{second_best_gap, Assignment, AssignmentSolver, CostMatrix, ExactSolver};
use crate::base::{cutoff, BaseDistanceKind};
use crate::error::{Error, Result};
use crate::model::{BernoulliComponent, MbDensity, MbMixture, MetricParams};
use crate::scalar::{sum, Scalar};

/// The four `alpha = 2` error terms, all in p-th-power units.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Decomposition<T> {
    /// Expected localization error of assigned pairs, `min(r_x, r_y) d^p`.
    pub localization: T,
    /// Existence mismatch of assigned pairs, `|r_x - r_y| c^p / 2`.
    pub existence_mismatch: T,
    /// Unassigned components of the first argument, `r_x c^p / 2`.
    pub missed: T,
    /// Unassigned components of the second argument, `r_y c^p / 2`.
    pub false_detection: T,
}

impl<T: Scalar> Decomposition<T> {
    pub fn sum(&self) -> T {
        self.localization + self.existence_mismatch + self.missed + self.false_detection
    }

    pub(crate) fn scaled(&self, w: T) -> Self {
        Self {
            localization: self.localization * w,
            existence_mismatch: self.existence_mismatch * w,
            missed: self.missed * w,
            false_detection: self.false_detection * w,
        }
    }

    pub(crate) fn plus(&self, o: &Self) -> Self {
        Self {
            localization: self.localization + o.localization,
            existence_mismatch: self.existence_mismatch + o.existence_mismatch,
            missed: self.missed + o.missed,
            false_detection: self.false_detection + o.false_detection,
        }
    }
}

/// Result of a metric evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct PGospaResult<T> {
    /// Metric value in state units.
    pub total: T,
    /// Exponent the value was computed with.
    pub p: T,
    /// Assignment set as `(index in first argument, index in second)`,
    /// sorted by the first index. For `alpha = 2` pairs whose cut-off base
    /// distance reaches `c` are reported as unassigned.
    pub matched_pairs: Vec<(usize, usize)>,
    /// Present only for `alpha = 2`.
    pub decomposition: Option<Decomposition<T>>,
    /// Whether a different assignment comes within [`NEAR_TIE_TOL`] of the
    /// optimum. `None` when not checked (more than [`NEAR_TIE_LIMIT`]
    /// components on the smaller side).
    pub near_tie: Option<bool>,
}

/// Relative gap under which the optimum is flagged as non-unique.
pub const NEAR_TIE_TOL: f64 = 1e-9;
/// Largest smaller-side size for which the near-tie check runs; it costs one
/// extra assignment solve per matched pair.
pub const NEAR_TIE_LIMIT: usize = 64;

#[inline]
pub(crate) fn pth_root<T: Scalar>(x: T, p: T) -> T {
    let x = x.max(T::zero());
    if p == T::one() {
        x
    } else {
        x.powf(p.recip())
    }
}

/// Per-pair quantities shared by every evaluation path.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PairTerms<T> {
    /// `min(r_x, r_y) d^(c)^p`
    pub localization: T,
    /// `|r_x - r_y| c^p / alpha`
    pub existence: T,
    /// `d < c` with both existence probabilities positive
    pub within_cutoff: bool,
}

pub(crate) fn pair_terms<T: Scalar>(
    bx: &BernoulliComponent<T>,
    by: &BernoulliComponent<T>,
    params: &MetricParams<T>,
    base: BaseDistanceKind,
) -> Result<PairTerms<T>> {
    let r_min = bx.r().min(by.r());
    let existence = (bx.r() - by.r()).abs() * params.unmatched_cost();
    if r_min == T::zero() {
        // the density of a non-existent object never enters
        return Ok(PairTerms { localization: T::zero(), existence, within_cutoff: false });
    }
    let d = base.distance(bx.density(), by.density())?;
    let dc = cutoff(d, params.c());
    Ok(PairTerms { localization: r_min * dc.powf(params.p()), existence, within_cutoff: d < params.c() })
}

/// Metric between two Bernoulli densities:
/// `(min(r_x, r_y) d^(c)^p + |r_x - r_y| c^p / alpha)^(1/p)`.
pub fn bernoulli_pgospa<T: Scalar>(
    bx: &BernoulliComponent<T>,
    by: &BernoulliComponent<T>,
    params: &MetricParams<T>,
    base: BaseDistanceKind,
) -> Result<T> {
    let t = pair_terms(bx, by, params, base)?;
    Ok(pth_root(t.localization + t.existence, params.p()))
}

/// Metric between two MB densities using the exact assignment solver.
pub fn pgospa<T: Scalar>(
    fx: &MbDensity<T>,
    fy: &MbDensity<T>,
    params: &MetricParams<T>,
    base: BaseDistanceKind,
) -> Result<PGospaResult<T>> {
    pgospa_with_solver(fx, fy, params, base, &ExactSolver)
}

/// Metric between two MB densities.
///
/// The minimum over permutations is reduced to a rectangular assignment with
/// the smaller MB on the rows: entry `(i, j)` is the pair cost minus the
/// cost `r_y^j c^p / alpha` that column `j` would incur unassigned, so the
/// optimum differs from the metric by the constant `sum_j r_y^j c^p / alpha`.
/// The reported value is re-summed from the chosen pairs, which keeps it free
/// of that cancellation.
pub fn pgospa_with_solver<T: Scalar>(
    fx: &MbDensity<T>,
    fy: &MbDensity<T>,
    params: &MetricParams<T>,
    base: BaseDistanceKind,
    solver: &dyn AssignmentSolver<T>,
) -> Result<PGospaResult<T>> {
    let swap = match fx.len().cmp(&fy.len()) {
        Ordering::Less => false,
        Ordering::Greater => true,
        Ordering::Equal => fx.canonical_cmp(fy) == Ordering::Greater,
    };
    let (rows, cols) = if swap { (fy, fx) } else { (fx, fy) };
    let (nr, nc) = (rows.len(), cols.len());
    let unit = params.unmatched_cost();

    let mut terms = Vec::with_capacity(nr * nc);
    for a in rows.components() {
        for b in cols.components() {
            terms.push(pair_terms(a, b, params, base)?);
        }
    }
    let costs = CostMatrix::from_fn(nr, nc, |i, j| {
        let t = terms[i * nc + j];
        t.localization + t.existence - cols.components()[j].r() * unit
    })?;
    let assignment = solver.solve(&costs);

    let mut col_used = vec![false; nc];
    for &(_, j) in &assignment.pairs {
        col_used[j] = true;
    }
    let pair_sum = sum(assignment.pairs.iter().map(|&(i, j)| {
        let t = terms[i * nc + j];
        t.localization + t.existence
    }));
    let unmatched_sum =
        sum((0..nc).filter(|&j| !col_used[j]).map(|j| cols.components()[j].r() * unit));
    let total = pth_root(pair_sum + unmatched_sum, params.p());

    let orient = |(i, j): (usize, usize)| if swap { (j, i) } else { (i, j) };
    let decomposable = params.decomposable();
    let mut matched_pairs: Vec<(usize, usize)> = assignment
        .pairs
        .iter()
        .filter(|&&(i, j)| !decomposable || terms[i * nc + j].within_cutoff)
        .map(|&ij| orient(ij))
        .collect();
    matched_pairs.sort_unstable();

    let decomposition = decomposable.then(|| {
        let mut x_used = vec![false; fx.len()];
        let mut y_used = vec![false; fy.len()];
        let mut d = Decomposition::default();
        for &(i, j) in &matched_pairs {
            x_used[i] = true;
            y_used[j] = true;
            let t = if swap { terms[j * nc + i] } else { terms[i * nc + j] };
            d.localization = d.localization + t.localization;
            d.existence_mismatch = d.existence_mismatch + t.existence;
        }
        d.missed = sum(fx.components().iter().zip(&x_used).filter(|(_, &u)| !u).map(|(c, _)| c.r() * unit));
        d.false_detection =
            sum(fy.components().iter().zip(&y_used).filter(|(_, &u)| !u).map(|(c, _)| c.r() * unit));
        d
    });

    Ok(PGospaResult {
        total,
        p: params.p(),
        matched_pairs,
        decomposition,
        near_tie: near_tie(&costs, &assignment, solver),
    })
}

fn near_tie<T: Scalar>(
    costs: &CostMatrix<T>,
    best: &Assignment<T>,
    solver: &dyn AssignmentSolver<T>,
) -> Option<bool> {
    if costs.rows().min(costs.cols()) > NEAR_TIE_LIMIT {
        return None;
    }
    let tol = T::lit(NEAR_TIE_TOL) * best.total_cost.abs().max(T::one());
    Some(second_best_gap(costs, best, solver).is_some_and(|gap| gap <= tol))
}

/// GOSPA between finite point sets with the Euclidean base distance. Equal
/// to [`pgospa`] on the corresponding `r = 1` Dirac MBs.
pub fn gospa<T: Scalar>(x: &[Vec<T>], y: &[Vec<T>], params: &MetricParams<T>) -> Result<PGospaResult<T>> {
    let dim = x.first().or(y.first()).map(Vec::len);
    if let Some(dim) = dim {
        if let Some(bad) = x.iter().chain(y).find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
        }
    }
    let lex = |a: &[Vec<T>], b: &[Vec<T>]| {
        a.iter()
            .flatten()
            .zip(b.iter().flatten())
            .map(|(u, v)| u.partial_cmp(v).unwrap_or(Ordering::Equal))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    };
    let swap = match x.len().cmp(&y.len()) {
        Ordering::Less => false,
        Ordering::Greater => true,
        Ordering::Equal => lex(x, y) == Ordering::Greater,
    };
    let (rows, cols) = if swap { (y, x) } else { (x, y) };
    let (nr, nc) = (rows.len(), cols.len());
    let c = params.c();
    let dist = |a: &[T], b: &[T]| sum(a.iter().zip(b).map(|(&u, &v)| (u - v) * (u - v))).sqrt();
    let mut d = Vec::with_capacity(nr * nc);
    for a in rows {
        for b in cols {
            d.push(dist(a, b));
        }
    }
    let costs = CostMatrix::from_fn(nr, nc, |i, j| cutoff(d[i * nc + j], c).powf(params.p()))?;
    let assignment = ExactSolver.solve(&costs);
    let unit = params.unmatched_cost();
    let unmatched = T::lit((nc - assignment.pairs.len()) as f64);
    let total = pth_root(assignment.total_cost + unmatched * unit, params.p());

    let orient = |(i, j): (usize, usize)| if swap { (j, i) } else { (i, j) };
    let decomposable = params.decomposable();
    let mut matched_pairs: Vec<(usize, usize)> = assignment
        .pairs
        .iter()
        .filter(|&&(i, j)| !decomposable || d[i * nc + j] < c)
        .map(|&ij| orient(ij))
        .collect();
    matched_pairs.sort_unstable();
    let decomposition = decomposable.then(|| {
        let assigned = T::lit(matched_pairs.len() as f64);
        let localization = sum(matched_pairs.iter().map(|&(i, j)| {
            let (r, k) = if swap { (j, i) } else { (i, j) };
            costs.get(r, k)
        }));
        Decomposition {
            localization,
            existence_mismatch: T::zero(),
            missed: (T::lit(x.len() as f64) - assigned) * unit,
            false_detection: (T::lit(y.len() as f64) - assigned) * unit,
        }
    });
    Ok(PGospaResult {
        total,
        p: params.p(),
        matched_pairs,
        decomposition,
        near_tie: near_tie(&costs, &assignment, &ExactSolver),
    })
}

/// Metric from a mixture of MBs to a reference MB: the weighted sum of the
/// per-entry values.
pub fn mbm_pgospa<T: Scalar>(
    mix: &MbMixture<T>,
    reference: &MbDensity<T>,
    params: &MetricParams<T>,
    base: BaseDistanceKind,
) -> Result<T> {
    Ok(mbm_pgospa_detailed(mix, reference, params, base)?.total)
}

/// Per-entry breakdown of [`mbm_pgospa`].
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureResult<T> {
    pub total: T,
    pub entries: Vec<(T, PGospaResult<T>)>,
    /// Weighted sum of the entry decompositions (p-th-power units).
    pub decomposition: Option<Decomposition<T>>,
}

pub fn mbm_pgospa_detailed<T: Scalar>(
    mix: &MbMixture<T>,
    reference: &MbDensity<T>,
    params: &MetricParams<T>,
    base: BaseDistanceKind,
) -> Result<MixtureResult<T>> {
    if mix.entries().is_empty() {
        return Err(Error::EmptyMixture);
    }
    let entries = mix
        .entries()
        .iter()
        .map(|(w, mb)| Ok((*w, pgospa(mb, reference, params, base)?)))
        .collect::<Result<Vec<_>>>()?;
    let total = sum(entries.iter().map(|(w, r)| *w * r.total));
    let decomposition = params.decomposable().then(|| {
        entries.iter().fold(Decomposition::default(), |acc, (w, r)| {
            acc.plus(&r.decomposition.expect("alpha = 2").scaled(*w))
        })
    });
    Ok(MixtureResult { total, entries, decomposition })
}
