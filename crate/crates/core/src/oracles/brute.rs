use crate::base::BaseDistanceKind;
use crate::error::{Error, Result};
use crate::metric::{pth_root, Decomposition};
use crate::model::{MbDensity, MetricParams};
use crate::scalar::{sum, Scalar};

/// Largest MB size accepted by [`brute_force_pgospa`].
pub const PERMUTATION_LIMIT: usize = 7;
/// Largest `n_x + n_y` accepted by [`brute_force_assignment_sets`].
pub const ASSIGNMENT_SET_LIMIT: usize = 12;

/// Base distances for every pair, `None` where either existence
/// probability is zero and the density never matters.
fn distances<T: Scalar>(
    fx: &MbDensity<T>,
    fy: &MbDensity<T>,
    base: BaseDistanceKind,
) -> Result<Vec<Vec<Option<T>>>> {
    fx.components()
        .iter()
        .map(|a| {
            fy.components()
                .iter()
                .map(|b| {
                    if a.r() == T::zero() || b.r() == T::zero() {
                        Ok(None)
                    } else {
                        base.distance(a.density(), b.density()).map(Some)
                    }
                })
                .collect()
        })
        .collect()
}

/// Visits every injection of `0..n` into `0..m` (`n <= m`).
fn for_each_injection(n: usize, m: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(k: usize, n: usize, m: usize, used: &mut [bool], cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if k == n {
            f(cur);
            return;
        }
        for j in 0..m {
            if !used[j] {
                used[j] = true;
                cur.push(j);
                rec(k + 1, n, m, used, cur, f);
                cur.pop();
                used[j] = false;
            }
        }
    }
    rec(0, n, m, &mut vec![false; m], &mut Vec::with_capacity(n), f);
}

/// The metric by direct minimisation over all permutations.
pub fn brute_force_pgospa<T: Scalar>(
    fx: &MbDensity<T>,
    fy: &MbDensity<T>,
    params: &MetricParams<T>,
    base: BaseDistanceKind,
) -> Result<T> {
    let n = fx.len().max(fy.len());
    if n > PERMUTATION_LIMIT {
        return Err(Error::SizeBound { what: "MB components", found: n, limit: PERMUTATION_LIMIT });
    }
    let (small, large, d) = if fx.len() <= fy.len() {
        (fx, fy, distances(fx, fy, base)?)
    } else {
        let d = distances(fx, fy, base)?;
        let t = (0..fy.len()).map(|j| (0..fx.len()).map(|i| d[i][j]).collect()).collect();
        (fy, fx, t)
    };
    let (c, p, unit) = (params.c(), params.p(), params.unmatched_cost());
    let rs: Vec<T> = small.components().iter().map(|b| b.r()).collect();
    let rl: Vec<T> = large.components().iter().map(|b| b.r()).collect();
    let mut best = T::infinity();
    for_each_injection(small.len(), large.len(), &mut |pi| {
        let mut assigned = vec![false; large.len()];
        let mut total = T::zero();
        for (i, &j) in pi.iter().enumerate() {
            assigned[j] = true;
            let loc = d[i][j].map_or(T::zero(), |d| rs[i].min(rl[j]) * d.min(c).powf(p));
            total = total + loc + (rs[i] - rl[j]).abs() * unit;
        }
        for j in 0..large.len() {
            if !assigned[j] {
                total = total + rl[j] * unit;
            }
        }
        best = best.min(total);
    });
    Ok(pth_root(best, p))
}

/// Optimum of the assignment-set formulation.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentSetOptimum<T> {
    /// Metric value (p-th root).
    pub value: T,
    /// Objective in p-th-power units.
    pub value_pow: T,
    /// A minimising set, pairs sorted by first index.
    pub gamma: Vec<(usize, usize)>,
}

/// The four terms of the assignment-set objective for a given set `gamma`,
/// with the uncut base distance and `alpha = 2`.
pub fn assignment_set_objective<T: Scalar>(
    fx: &MbDensity<T>,
    fy: &MbDensity<T>,
    gamma: &[(usize, usize)],
    params: &MetricParams<T>,
    base: BaseDistanceKind,
) -> Result<Decomposition<T>> {
    let half = params.c().powf(params.p()) / T::lit(2.0);
    let (cx, cy) = (fx.components(), fy.components());
    let mut used_x = vec![false; cx.len()];
    let mut used_y = vec![false; cy.len()];
    let mut loc = Vec::with_capacity(gamma.len());
    let mut mis = Vec::with_capacity(gamma.len());
    for &(i, j) in gamma {
        if i >= cx.len() || j >= cy.len() || used_x[i] || used_y[j] {
            return Err(Error::InvalidParams(format!("({i}, {j}) is not a valid assignment pair")));
        }
        used_x[i] = true;
        used_y[j] = true;
        let r = cx[i].r().min(cy[j].r());
        loc.push(if r == T::zero() {
            T::zero()
        } else {
            r * base.distance(cx[i].density(), cy[j].density())?.powf(params.p())
        });
        mis.push((cx[i].r() - cy[j].r()).abs() * half);
    }
    let left = |cs: &[crate::model::BernoulliComponent<T>], used: &[bool]| {
        sum(cs.iter().zip(used).filter(|(_, &u)| !u).map(|(b, _)| b.r() * half))
    };
    Ok(Decomposition {
        localization: sum(loc),
        existence_mismatch: sum(mis),
        missed: left(cx, &used_x),
        false_detection: left(cy, &used_y),
    })
}

/// Exhaustive minimum over every assignment set `gamma` (any size, any
/// pairs), for `alpha = 2`.
pub fn brute_force_assignment_sets<T: Scalar>(
    fx: &MbDensity<T>,
    fy: &MbDensity<T>,
    params: &MetricParams<T>,
    base: BaseDistanceKind,
) -> Result<AssignmentSetOptimum<T>> {
    if !params.decomposable() {
        return Err(Error::InvalidParams("assignment-set form requires alpha = 2".into()));
    }
    let n = fx.len() + fy.len();
    if n > ASSIGNMENT_SET_LIMIT {
        return Err(Error::SizeBound { what: "total MB components", found: n, limit: ASSIGNMENT_SET_LIMIT });
    }
    let d = distances(fx, fy, base)?;
    let (p, half) = (params.p(), params.c().powf(params.p()) / T::lit(2.0));
    let rx: Vec<T> = fx.components().iter().map(|b| b.r()).collect();
    let ry: Vec<T> = fy.components().iter().map(|b| b.r()).collect();
    let pair = |i: usize, j: usize| {
        d[i][j].map_or(T::zero(), |d| rx[i].min(ry[j]) * d.powf(p)) + (rx[i] - ry[j]).abs() * half
    };

    struct Search<'a, T> {
        rx: &'a [T],
        ry: &'a [T],
        half: T,
        used_y: Vec<bool>,
        gamma: Vec<(usize, usize)>,
        best: (T, Vec<(usize, usize)>),
    }
    fn rec<T: Scalar>(s: &mut Search<'_, T>, i: usize, acc: T, pair: &dyn Fn(usize, usize) -> T) {
        if i == s.rx.len() {
            let free_y = sum(s.ry.iter().zip(&s.used_y).filter(|(_, &u)| !u).map(|(&r, _)| r * s.half));
            let total = acc + free_y;
            if total < s.best.0 {
                s.best = (total, s.gamma.clone());
            }
            return;
        }
        rec(s, i + 1, acc + s.rx[i] * s.half, pair);
        for j in 0..s.ry.len() {
            if !s.used_y[j] {
                s.used_y[j] = true;
                s.gamma.push((i, j));
                rec(s, i + 1, acc + pair(i, j), pair);
                s.gamma.pop();
                s.used_y[j] = false;
            }
        }
    }
    let mut s = Search {
        rx: &rx,
        ry: &ry,
        half,
        used_y: vec![false; ry.len()],
        gamma: Vec::new(),
        best: (T::infinity(), Vec::new()),
    };
    rec(&mut s, 0, T::zero(), &pair);
    let (value_pow, gamma) = s.best;
    Ok(AssignmentSetOptimum { value: pth_root(value_pow, p), value_pow, gamma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::bernoulli_pgospa;
    use crate::model::{BernoulliComponent, SingleObjectDensity};

    const W2: BaseDistanceKind = BaseDistanceKind::Wasserstein2;

    fn dirac(r: f64, x: f64) -> BernoulliComponent<f64> {
        BernoulliComponent::new(r, SingleObjectDensity::dirac(vec![x]).unwrap()).unwrap()
    }

    fn params(c: f64, p: f64, alpha: f64) -> MetricParams<f64> {
        MetricParams::new(c, p, alpha).unwrap()
    }

    #[test]
    fn empty_inputs() {
        let e = MbDensity::<f64>::empty();
        assert_eq!(brute_force_pgospa(&e, &e, &params(5.0, 1.0, 2.0), W2).unwrap(), 0.0);
        let a = brute_force_assignment_sets(&e, &e, &params(5.0, 1.0, 2.0), W2).unwrap();
        assert_eq!((a.value, a.gamma), (0.0, vec![]));
    }

    #[test]
    fn single_pair_matches_bernoulli_form() {
        for &(rx, ry, d) in &[(1.0, 0.6, 2.0), (0.3, 0.9, 7.0), (0.5, 0.5, 0.0)] {
            let (a, b) = (dirac(rx, 0.0), dirac(ry, d));
            let p = params(5.0, 2.0, 1.3);
            let x = MbDensity::new(vec![a.clone()]).unwrap();
            let y = MbDensity::new(vec![b.clone()]).unwrap();
            assert_eq!(brute_force_pgospa(&x, &y, &p, W2).unwrap(), bernoulli_pgospa(&a, &b, &p, W2).unwrap());
        }
    }

    #[test]
    fn far_singletons_stay_unassigned() {
        let x = MbDensity::new(vec![dirac(0.9, 0.0)]).unwrap();
        let y = MbDensity::new(vec![dirac(0.4, 6.0)]).unwrap();
        let a = brute_force_assignment_sets(&x, &y, &params(5.0, 1.0, 2.0), W2).unwrap();
        assert!(a.gamma.is_empty());
        assert!((a.value - 1.3 * 2.5).abs() < 1e-15);
    }

    #[test]
    fn hand_enumerated_two_by_one() {
        // match x0: 0.5*1 + 0.5*2.5 + 2.5 = 4.25; match x1: 0.5*3 + 0.5*2.5 + 2.5 = 5.25
        let x = MbDensity::new(vec![dirac(1.0, 0.0), dirac(1.0, 4.0)]).unwrap();
        let y = MbDensity::new(vec![dirac(0.5, 1.0)]).unwrap();
        let p = params(5.0, 1.0, 2.0);
        assert!((brute_force_pgospa(&x, &y, &p, W2).unwrap() - 4.25).abs() < 1e-15);
        let a = brute_force_assignment_sets(&x, &y, &p, W2).unwrap();
        assert_eq!(a.gamma, vec![(0, 0)]);
        assert!((a.value - 4.25).abs() < 1e-15);
        let terms = assignment_set_objective(&x, &y, &a.gamma, &p, W2).unwrap();
        assert!((terms.sum() - 4.25).abs() < 1e-15);
        assert_eq!(terms.missed, 2.5);
    }

    #[test]
    fn size_bounds() {
        let big = MbDensity::new((0..8).map(|k| dirac(0.5, k as f64)).collect()).unwrap();
        let p = params(5.0, 1.0, 2.0);
        assert!(matches!(brute_force_pgospa(&big, &big, &p, W2), Err(Error::SizeBound { .. })));
        let seven = MbDensity::new((0..7).map(|k| dirac(0.5, k as f64)).collect()).unwrap();
        assert!(matches!(brute_force_assignment_sets(&seven, &seven, &p, W2), Err(Error::SizeBound { .. })));
        assert!(brute_force_assignment_sets(&seven, &seven, &params(5.0, 1.0, 1.0), W2).is_err());
    }

    #[test]
    fn invalid_gamma_rejected() {
        let x = MbDensity::new(vec![dirac(1.0, 0.0)]).unwrap();
        let p = params(5.0, 1.0, 2.0);
        assert!(assignment_set_objective(&x, &x, &[(0, 1)], &p, W2).is_err());
        assert!(assignment_set_objective(&x, &x, &[(0, 0), (0, 0)], &p, W2).is_err());
    }
}
