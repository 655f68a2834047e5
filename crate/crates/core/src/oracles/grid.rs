use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use super::network_simplex::solve_transport;
use crate::error::{Error, Result};
use crate::linalg::SymmetricEigen;
use crate::metric::pth_root;
use crate::model::{BernoulliComponent, MetricParams, SingleObjectDensity};

/// Smallest accepted number of cells per axis.
pub const MIN_GRID_RESOLUTION: usize = 10;
/// Largest transport problem (source atoms times target atoms) attempted.
pub const MAX_GRID_ARCS: usize = 4_000_000;
/// Half-width of the grid in standard deviations.
const GRID_HALF_WIDTH: f64 = 6.0;

/// A discrete measure approximating a single-object density.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    pub points: Vec<Vec<f64>>,
    /// Nonnegative, summing to one.
    pub weights: Vec<f64>,
    /// Upper bound on the first Wasserstein distance to the density.
    pub w1_bound: f64,
}

/// Equal-width cells over `±6σ` along one axis: cell centres, renormalized
/// `pdf × width` masses, and the exact first Wasserstein distance to
/// `N(0, σ²)`.
fn axis_grid(sigma: f64, resolution: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let std = Normal::standard();
    let h = 2.0 * GRID_HALF_WIDTH * sigma / resolution as f64;
    let t: Vec<f64> = (0..resolution).map(|l| -GRID_HALF_WIDTH * sigma + (l as f64 + 0.5) * h).collect();
    let raw: Vec<f64> = t.iter().map(|&x| std.pdf(x / sigma) / sigma * h).collect();
    let z: f64 = raw.iter().sum();
    let w: Vec<f64> = raw.iter().map(|x| x / z).collect();

    // antiderivative of the Gaussian CDF
    let g = |x: f64| x * std.cdf(x / sigma) + sigma * std.pdf(x / sigma);
    let phi = |x: f64| std.cdf(x / sigma);
    let mut w1 = g(t[0]) + g(-t[resolution - 1]);
    let mut f = 0.0;
    for l in 0..resolution - 1 {
        f += w[l];
        let (a, b) = (t[l], t[l + 1]);
        w1 += if f <= phi(a) {
            g(b) - g(a) - f * (b - a)
        } else if f >= phi(b) {
            f * (b - a) - (g(b) - g(a))
        } else {
            let s = (sigma * std.inverse_cdf(f)).clamp(a, b);
            (f * (s - a) - (g(s) - g(a))) + ((g(b) - g(s)) - f * (b - s))
        };
    }
    // allowance for the cancellation in the differences above
    let margin = 1e-12 * sigma * resolution as f64;
    (t, w, w1.max(0.0) + margin)
}

impl GridDensity {
    /// Discretizes along the principal axes of the covariance with
    /// `resolution` cells per axis of positive variance. A Dirac becomes a
    /// single atom.
    pub fn discretize(density: &SingleObjectDensity<f64>, resolution: usize) -> Result<Self> {
        if resolution < MIN_GRID_RESOLUTION {
            return Err(Error::GridTooCoarse { resolution, minimum: MIN_GRID_RESOLUTION });
        }
        let mean = density.mean().to_vec();
        let Some(cov) = density.covariance() else {
            return Ok(Self { points: vec![mean], weights: vec![1.0], w1_bound: 0.0 });
        };
        let eig = SymmetricEigen::new(cov);
        let dim = mean.len();
        let mut points = vec![mean];
        let mut weights = vec![1.0];
        let mut w1_bound = 0.0;
        for k in 0..dim {
            let var = eig.values[k];
            if var <= 0.0 {
                continue;
            }
            let (t, w, w1) = axis_grid(var.sqrt(), resolution);
            if points.len() * t.len() > MAX_GRID_ARCS {
                return Err(Error::SizeBound { what: "grid atoms", found: points.len() * t.len(), limit: MAX_GRID_ARCS });
            }
            w1_bound += w1;
            let mut next_points = Vec::with_capacity(points.len() * t.len());
            let mut next_weights = Vec::with_capacity(points.len() * t.len());
            for (pt, pw) in points.iter().zip(&weights) {
                for (tl, wl) in t.iter().zip(&w) {
                    next_points.push((0..dim).map(|d| pt[d] + tl * eig.vectors[(d, k)]).collect());
                    next_weights.push(pw * wl);
                }
            }
            points = next_points;
            weights = next_weights;
        }
        Ok(Self { points, weights, w1_bound })
    }
}

/// Transport value between two discretized Bernoulli densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOtResult {
    /// p-th root of `value_pow`.
    pub value: f64,
    /// Optimal cost of the discrete problem.
    pub value_pow: f64,
    /// Bound on how far `value_pow` can exceed the transport value between
    /// the undiscretized densities: the cost's Lipschitz constant times the
    /// discretization error in first Wasserstein distance, plus the solver
    /// tolerance.
    pub eps_grid: f64,
}

fn discretization_slack(rx: f64, gx: &GridDensity, ry: f64, gy: &GridDensity, params: &MetricParams<f64>) -> f64 {
    // Lipschitz constant of min(d, c)^p in either argument
    let lipschitz = params.p() * params.c().powf(params.p() - 1.0);
    lipschitz * (rx * gx.w1_bound + ry * gy.w1_bound)
}

/// The discretization part of [`GridOtResult::eps_grid`] at a given
/// resolution, without solving the transport problem.
pub fn grid_slack(
    bx: &BernoulliComponent<f64>,
    by: &BernoulliComponent<f64>,
    params: &MetricParams<f64>,
    resolution: usize,
) -> Result<f64> {
    let gx = GridDensity::discretize(bx.density(), resolution)?;
    let gy = GridDensity::discretize(by.density(), resolution)?;
    Ok(discretization_slack(bx.r(), &gx, by.r(), &gy, params))
}

/// Optimal transport between two Bernoulli densities over the atoms
/// `{∅} ∪ grid`, where the both-present cost is `min(|x - y|, c)^p` and an
/// object paired with `∅` costs `c^p / alpha`.
///
/// With the W2 base distance and `1 <= p <= 2`, `value_pow - eps_grid` never
/// exceeds the p-th power of the metric between the two Bernoullis.
pub fn bernoulli_ot_grid(
    bx: &BernoulliComponent<f64>,
    by: &BernoulliComponent<f64>,
    params: &MetricParams<f64>,
    resolution: usize,
) -> Result<GridOtResult> {
    let (dx, dy) = (bx.density(), by.density());
    if dx.dim() != dy.dim() {
        return Err(Error::DimensionMismatch { expected: dx.dim(), found: dy.dim() });
    }
    let gx = GridDensity::discretize(dx, resolution)?;
    let gy = GridDensity::discretize(dy, resolution)?;

    // atom 0 is ∅, the rest are grid points; zero-mass atoms are dropped
    let atoms = |r: f64, g: &GridDensity| -> Vec<(Option<usize>, f64)> {
        std::iter::once((None, 1.0 - r))
            .chain(g.weights.iter().enumerate().map(|(k, w)| (Some(k), r * w)))
            .filter(|(_, m)| *m > 0.0)
            .collect()
    };
    let (ax, ay) = (atoms(bx.r(), &gx), atoms(by.r(), &gy));
    if ax.len() * ay.len() > MAX_GRID_ARCS {
        return Err(Error::SizeBound { what: "grid transport arcs", found: ax.len() * ay.len(), limit: MAX_GRID_ARCS });
    }
    let (c, p, unit) = (params.c(), params.p(), params.unmatched_cost());
    let mut cost = Vec::with_capacity(ax.len() * ay.len());
    for (i, _) in &ax {
        for (j, _) in &ay {
            cost.push(match (i, j) {
                (None, None) => 0.0,
                (Some(i), Some(j)) => {
                    let d2: f64 = gx.points[*i].iter().zip(&gy.points[*j]).map(|(a, b)| (a - b) * (a - b)).sum();
                    d2.sqrt().min(c).powf(p)
                }
                _ => unit,
            });
        }
    }
    let supply: Vec<f64> = ax.iter().map(|a| a.1).collect();
    let demand: Vec<f64> = ay.iter().map(|a| a.1).collect();
    let sol = solve_transport(&supply, &demand, &cost)?;
    let eps_grid = discretization_slack(bx.r(), &gx, by.r(), &gy, params) + sol.optimality_tol;
    Ok(GridOtResult { value: pth_root(sol.cost, p), value_pow: sol.cost, eps_grid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::BaseDistanceKind;
    use crate::linalg::SquareMatrix;
    use crate::metric::bernoulli_pgospa;
    use crate::oracles::bernoulli_ot_dirac;

    fn gauss(r: f64, m: f64, v: f64) -> BernoulliComponent<f64> {
        BernoulliComponent::new(r, SingleObjectDensity::gaussian_1d(m, v).unwrap()).unwrap()
    }

    #[test]
    fn axis_grid_w1_matches_quadrature() {
        let std = Normal::standard();
        let (t, w, w1) = axis_grid(2.0, 40);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        // midpoint rule on |F_grid - Φ| over a wide window
        let (lo, hi, steps) = (-20.0, 20.0, 400_000);
        let dx = (hi - lo) / steps as f64;
        let mut acc = 0.0;
        for s in 0..steps {
            let x = lo + (s as f64 + 0.5) * dx;
            let f: f64 = t.iter().zip(&w).filter(|(ti, _)| **ti <= x).map(|(_, wi)| wi).sum();
            acc += (f - std.cdf(x / 2.0)).abs() * dx;
        }
        assert!((acc - w1).abs() < 1e-6, "{acc} vs {w1}");
    }

    #[test]
    fn w1_shrinks_with_resolution() {
        let a = axis_grid(1.0, 100).2;
        let b = axis_grid(1.0, 200).2;
        assert!(b < 0.6 * a);
    }

    #[test]
    fn identical_bernoullis() {
        let p = MetricParams::new(5.0, 2.0, 2.0).unwrap();
        let b = gauss(0.7, 1.0, 2.0);
        let r = bernoulli_ot_grid(&b, &b, &p, 60).unwrap();
        assert!(r.value_pow <= r.eps_grid);
    }

    #[test]
    fn dirac_limit() {
        let p = MetricParams::new(5.0, 1.0, 2.0).unwrap();
        let r = bernoulli_ot_grid(&gauss(1.0, 0.0, 1e-6), &gauss(0.6, 2.0, 1e-6), &p, 40).unwrap();
        let exact = bernoulli_ot_dirac(1.0, &[0.0], 0.6, &[2.0], &p).unwrap();
        assert!((r.value - exact).abs() < 1e-3);
    }

    #[test]
    fn equal_variance_bound() {
        let p = MetricParams::new(5.0, 2.0, 2.0).unwrap();
        let (bx, by) = (gauss(1.0, 0.0, 1.0), gauss(1.0, 2.0, 1.0));
        let r = bernoulli_ot_grid(&bx, &by, &p, 100).unwrap();
        let bound = bernoulli_pgospa(&bx, &by, &p, BaseDistanceKind::Wasserstein2).unwrap().powi(2);
        assert!((bound - 4.0).abs() < 1e-12);
        assert!(r.value_pow <= bound + r.eps_grid);
    }

    #[test]
    fn two_dimensional_correlated() {
        let cov = SquareMatrix::from_rows(&[vec![1.0, 0.4], vec![0.4, 0.5]]).unwrap();
        let d = SingleObjectDensity::gaussian(vec![0.0, 1.0], cov).unwrap();
        let g = GridDensity::discretize(&d, 20).unwrap();
        assert_eq!(g.points.len(), 400);
        let mean: Vec<f64> = (0..2).map(|k| g.points.iter().zip(&g.weights).map(|(x, w)| x[k] * w).sum()).collect();
        assert!(mean[0].abs() < 1e-12 && (mean[1] - 1.0).abs() < 1e-12);
        let p = MetricParams::new(4.0, 1.0, 2.0).unwrap();
        let bx = BernoulliComponent::new(0.8, d.clone()).unwrap();
        let by = BernoulliComponent::new(0.5, SingleObjectDensity::dirac(vec![1.0, 1.0]).unwrap()).unwrap();
        let r = bernoulli_ot_grid(&bx, &by, &p, 20).unwrap();
        let bound = bernoulli_pgospa(&bx, &by, &p, BaseDistanceKind::Wasserstein2).unwrap();
        assert!(r.value_pow <= bound + r.eps_grid);
    }

    #[test]
    fn resolution_guard() {
        let p = MetricParams::new(5.0, 1.0, 2.0).unwrap();
        let b = gauss(0.5, 0.0, 1.0);
        assert!(matches!(bernoulli_ot_grid(&b, &b, &p, 5), Err(Error::GridTooCoarse { .. })));
    }
}
