//! Seeded random instances for property checks.

use rand::Rng;

use crate::linalg::SquareMatrix;
use crate::model::{BernoulliComponent, MbDensity, MetricParams, SingleObjectDensity, ValidationOptions};

/// A random symmetric positive definite matrix `A A^T + 0.1 I`.
pub fn random_spd(rng: &mut impl Rng, dim: usize) -> SquareMatrix<f64> {
    let mut a = SquareMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            a[(i, j)] = rng.random_range(-1.5..1.5);
        }
    }
    a.matmul(&a.transpose()).add(&SquareMatrix::identity(dim).scale(0.1))
}

pub fn random_point(rng: &mut impl Rng, dim: usize, spread: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-spread..spread)).collect()
}

/// A Gaussian with random mean and covariance, or with probability
/// `dirac_prob` a Dirac.
pub fn random_density(rng: &mut impl Rng, dim: usize, dirac_prob: f64) -> SingleObjectDensity<f64> {
    let mean = random_point(rng, dim, 5.0);
    if rng.random_bool(dirac_prob) {
        SingleObjectDensity::dirac(mean).expect("finite location")
    } else {
        SingleObjectDensity::gaussian(mean, random_spd(rng, dim)).expect("positive definite")
    }
}

/// Existence probability in `(0, 1]`, equal to one a fifth of the time.
pub fn random_existence(rng: &mut impl Rng) -> f64 {
    if rng.random_bool(0.2) {
        1.0
    } else {
        rng.random_range(0.01..1.0)
    }
}

/// An MB with exactly `n` components of dimension `dim`.
pub fn random_mb(rng: &mut impl Rng, n: usize, dim: usize, dirac_prob: f64) -> MbDensity<f64> {
    let components = (0..n)
        .map(|_| {
            let r = random_existence(rng);
            BernoulliComponent::with_options(r, random_density(rng, dim, dirac_prob), ValidationOptions::default())
                .expect("valid component")
        })
        .collect();
    MbDensity::new(components).expect("consistent dimensions")
}

/// `c` in `[0.5, 10]`, `p` in `{1, 2}`, `alpha` in `(0, 2]` (exactly 2 a
/// third of the time).
pub fn random_params(rng: &mut impl Rng) -> MetricParams<f64> {
    let c = rng.random_range(0.5..=10.0);
    let p = if rng.random_bool(0.5) { 1.0 } else { 2.0 };
    let alpha = if rng.random_bool(1.0 / 3.0) { 2.0 } else { rng.random_range(0.05..=2.0) };
    MetricParams::new(c, p, alpha).expect("valid parameters")
}

pub fn random_points(rng: &mut impl Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| random_point(rng, dim, 5.0)).collect()
}

/// An MB with between zero and `max_n` components.
pub fn random_mb_upto(rng: &mut impl Rng, max_n: usize, dim: usize, dirac_prob: f64) -> MbDensity<f64> {
    let n = rng.random_range(0..=max_n);
    random_mb(rng, n, dim, dirac_prob)
}

pub fn random_points_upto(rng: &mut impl Rng, max_n: usize, dim: usize) -> Vec<Vec<f64>> {
    let n = rng.random_range(0..=max_n);
    random_points(rng, n, dim)
}
