//! Base distances between single-object densities.
//!
//! Every public distance canonicalizes its argument order first, so
//! `d(a, b)` and `d(b, a)` are computed by the same floating point
//! operations and agree bit for bit.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{psd_sqrt, SquareMatrix, SymmetricEigen};
use crate::model::SingleObjectDensity;
use crate::scalar::{sum, Scalar};

/// Which metric `d(p_x, p_y)` is used between single-object densities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum BaseDistanceKind {
    /// Gaussian 2-Wasserstein; Diracs are zero-covariance Gaussians.
    #[default]
    #[serde(rename = "w2", alias = "wasserstein2")]
    Wasserstein2,
    /// Gaussian Hellinger distance, bounded by one.
    #[serde(rename = "hellinger")]
    Hellinger,
    /// Euclidean distance between Dirac locations.
    #[serde(rename = "euclidean", alias = "euclidean-dirac")]
    EuclideanDirac,
}

impl BaseDistanceKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Wasserstein2 => "w2",
            Self::Hellinger => "hellinger",
            Self::EuclideanDirac => "euclidean",
        }
    }

    pub fn distance<T: Scalar>(
        self,
        a: &SingleObjectDensity<T>,
        b: &SingleObjectDensity<T>,
    ) -> Result<T> {
        match self {
            Self::Wasserstein2 => gaussian_w2(a, b),
            Self::Hellinger => gaussian_hellinger(a, b),
            Self::EuclideanDirac => euclidean_dirac(a, b),
        }
    }
}

impl fmt::Display for BaseDistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaseDistanceKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "w2" | "wasserstein2" => Ok(Self::Wasserstein2),
            "hellinger" => Ok(Self::Hellinger),
            "euclidean" | "euclidean-dirac" => Ok(Self::EuclideanDirac),
            other => Err(format!("unknown base distance '{other}' (expected w2, hellinger or euclidean)")),
        }
    }
}

/// `min(d, c)`.
#[inline]
pub fn cutoff<T: Scalar>(d: T, c: T) -> T {
    d.min(c)
}

fn ordered<'a, T: Scalar>(
    a: &'a SingleObjectDensity<T>,
    b: &'a SingleObjectDensity<T>,
) -> (&'a SingleObjectDensity<T>, &'a SingleObjectDensity<T>) {
    if a.canonical_cmp(b) == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    }
}

fn check_dims<T: Scalar>(a: &SingleObjectDensity<T>, b: &SingleObjectDensity<T>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(())
}

fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    sum(a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)))
}

/// Gaussian 2-Wasserstein distance
/// `sqrt(|m_x - m_y|^2 + tr(P_x + P_y - 2 (P_y^1/2 P_x P_y^1/2)^1/2))`.
/// A Dirac enters as a zero covariance, so two Diracs give the Euclidean
/// distance exactly.
pub fn gaussian_w2<T: Scalar>(a: &SingleObjectDensity<T>, b: &SingleObjectDensity<T>) -> Result<T> {
    check_dims(a, b)?;
    if a == b {
        return Ok(T::zero());
    }
    let (a, b) = ordered(a, b);
    let mean_sq = squared_distance(a.mean(), b.mean());
    let cov_term = match (a.covariance(), b.covariance()) {
        (None, None) => T::zero(),
        (Some(p), None) | (None, Some(p)) => p.trace(),
        (Some(px), Some(py)) => bures_term(px, py)?,
    };
    Ok((mean_sq + cov_term).max(T::zero()).sqrt())
}

/// `tr(P_x + P_y - 2 (P_y^1/2 P_x P_y^1/2)^1/2)`, clamped at zero.
fn bures_term<T: Scalar>(px: &SquareMatrix<T>, py: &SquareMatrix<T>) -> Result<T> {
    let root_y = psd_sqrt(py);
    let inner = root_y.matmul(px).matmul(&root_y).symmetrized();
    let eig = SymmetricEigen::new(&inner);
    let tol = T::psd_tol() * inner.max_abs().max(T::one());
    if let Some(min) = eig.min_value() {
        if min < -tol {
            return Err(Error::SqrtFailure { min_eigenvalue: min.as_f64() });
        }
    }
    let trace_root = sum(eig.values.iter().map(|l| l.max(T::zero()).sqrt()));
    Ok((px.trace() + py.trace() - T::lit(2.0) * trace_root).max(T::zero()))
}

/// Smallest covariance eigenvalue accepted by the Hellinger distance.
pub const HELLINGER_MIN_EIGENVALUE: f64 = 1e-12;

/// Hellinger distance `sqrt(1 - BC)` between Gaussians, where the
/// Bhattacharyya coefficient is
/// `det(P1)^1/4 det(P2)^1/4 / det(P)^1/2 * exp(-dm^T P^-1 dm / 8)` with
/// `P = (P1 + P2) / 2`. Requires strictly positive definite covariances.
pub fn gaussian_hellinger<T: Scalar>(
    a: &SingleObjectDensity<T>,
    b: &SingleObjectDensity<T>,
) -> Result<T> {
    check_dims(a, b)?;
    let (a, b) = ordered(a, b);
    let (Some(pa), Some(pb)) = (a.covariance(), b.covariance()) else {
        return Err(Error::BaseDistance {
            base: "hellinger",
            reason: "Dirac densities have no Hellinger distance to other densities".into(),
        });
    };
    let ea = positive_definite(pa)?;
    let eb = positive_definite(pb)?;
    if a == b {
        return Ok(T::zero());
    }
    let avg = pa.add(pb).scale(T::lit(0.5));
    let e = positive_definite(&avg)?;
    let log_det = |e: &SymmetricEigen<T>| sum(e.values.iter().map(|l| l.ln()));
    let dm: Vec<T> = a.mean().iter().zip(b.mean()).map(|(&x, &y)| x - y).collect();
    // dm^T P^-1 dm in the eigenbasis of P
    let n = dm.len();
    let mahalanobis = sum((0..n).map(|k| {
        let proj = sum((0..n).map(|i| e.vectors[(i, k)] * dm[i]));
        proj * proj / e.values[k]
    }));
    let log_bc = T::lit(0.25) * (log_det(&ea) + log_det(&eb)) - T::lit(0.5) * log_det(&e)
        - mahalanobis / T::lit(8.0);
    let bc = log_bc.exp().min(T::one());
    Ok((T::one() - bc).max(T::zero()).sqrt())
}

fn positive_definite<T: Scalar>(p: &SquareMatrix<T>) -> Result<SymmetricEigen<T>> {
    let e = SymmetricEigen::new(p);
    match e.min_value() {
        Some(min) if min <= T::lit(HELLINGER_MIN_EIGENVALUE) => Err(Error::BaseDistance {
            base: "hellinger",
            reason: format!("covariance is singular (smallest eigenvalue {min})"),
        }),
        _ => Ok(e),
    }
}

/// `|x - y|` between two Dirac locations.
pub fn euclidean_dirac<T: Scalar>(a: &SingleObjectDensity<T>, b: &SingleObjectDensity<T>) -> Result<T> {
    check_dims(a, b)?;
    if !(a.is_dirac() && b.is_dirac()) {
        return Err(Error::BaseDistance {
            base: "euclidean",
            reason: "both densities must be Dirac".into(),
        });
    }
    let (a, b) = ordered(a, b);
    Ok(squared_distance(a.mean(), b.mean()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1(m: f64, v: f64) -> SingleObjectDensity<f64> {
        SingleObjectDensity::gaussian_1d(m, v).unwrap()
    }

    fn g2(m: [f64; 2], diag: [f64; 2]) -> SingleObjectDensity<f64> {
        SingleObjectDensity::gaussian(m.to_vec(), SquareMatrix::from_diagonal(&diag)).unwrap()
    }

    fn dirac(x: &[f64]) -> SingleObjectDensity<f64> {
        SingleObjectDensity::dirac(x.to_vec()).unwrap()
    }

    #[test]
    fn w2_identical_is_zero() {
        let a = g2([1.0, 2.0], [0.3, 4.0]);
        assert_eq!(gaussian_w2(&a, &a.clone()).unwrap(), 0.0);
    }

    #[test]
    fn w2_gaussian_to_dirac() {
        // mean 2, variance 4 against a point at 0: sqrt(4 + 4)
        let d = gaussian_w2(&g1(2.0, 4.0), &dirac(&[0.0])).unwrap();
        assert!((d - 8f64.sqrt()).abs() < 1e-15);
        assert!((d - 2.828427).abs() < 1e-6);
    }

    #[test]
    fn w2_diagonal_2d() {
        // per dimension (sqrt(1) - sqrt(4))^2 = 1, two dims, plus |(3,4)|^2
        let d = gaussian_w2(&g2([0.0, 0.0], [1.0, 1.0]), &g2([3.0, 4.0], [4.0, 4.0])).unwrap();
        assert!((d - 27f64.sqrt()).abs() < 1e-12);
        assert!((d - 5.196152).abs() < 1e-6);
    }

    #[test]
    fn w2_between_diracs_equals_euclidean_exactly() {
        let a = dirac(&[0.3, -1.7, 2.0]);
        let b = dirac(&[1.1, 0.4, -0.6]);
        assert_eq!(gaussian_w2(&a, &b).unwrap(), euclidean_dirac(&a, &b).unwrap());
    }

    #[test]
    fn w2_rejects_dimension_mismatch() {
        assert!(matches!(
            gaussian_w2(&g1(0.0, 1.0), &dirac(&[0.0, 0.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn hellinger_identical_is_zero() {
        let a = g2([1.0, 2.0], [0.3, 4.0]);
        assert_eq!(gaussian_hellinger(&a, &a.clone()).unwrap(), 0.0);
    }

    #[test]
    fn hellinger_1d_unit_variance() {
        // trapezoidal quadrature of the Bhattacharyya integral
        let pdf = |x: f64, m: f64| (-(x - m) * (x - m) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let (lo, hi, n) = (-12.0, 14.0, 200_000);
        let step = (hi - lo) / n as f64;
        let bc: f64 = (0..=n)
            .map(|k| {
                let x = lo + k as f64 * step;
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                w * (pdf(x, 0.0) * pdf(x, 2.0)).sqrt() * step
            })
            .sum();
        let oracle = (1.0 - bc).sqrt();
        assert!((oracle - 0.627_271_345_0).abs() < 1e-9, "{oracle}");
        let h = gaussian_hellinger(&g1(0.0, 1.0), &g1(2.0, 1.0)).unwrap();
        assert!((h - oracle).abs() < 1e-9, "{h}");
        assert!((h - (1.0 - (-0.5f64).exp()).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn hellinger_approaches_one() {
        let h = gaussian_hellinger(&g1(0.0, 1.0), &g1(100.0, 1.0)).unwrap();
        assert!(h > 1.0 - 1e-12 && h <= 1.0);
    }

    #[test]
    fn hellinger_rejects_dirac_and_singular() {
        assert!(gaussian_hellinger(&g1(0.0, 1.0), &dirac(&[0.0])).is_err());
        assert!(gaussian_hellinger(&g1(0.0, 1.0), &g1(0.0, 0.0)).is_err());
    }

    #[test]
    fn euclidean_examples() {
        assert_eq!(euclidean_dirac(&dirac(&[1.0]), &dirac(&[1.0])).unwrap(), 0.0);
        assert_eq!(euclidean_dirac(&dirac(&[0.0]), &dirac(&[2.0])).unwrap(), 2.0);
        assert_eq!(euclidean_dirac(&dirac(&[0.0, 0.0]), &dirac(&[3.0, 4.0])).unwrap(), 5.0);
        assert!(euclidean_dirac(&dirac(&[0.0]), &g1(0.0, 1.0)).is_err());
    }

    #[test]
    fn cutoff_examples() {
        assert_eq!(cutoff(2.0, 5.0), 2.0);
        assert_eq!(cutoff(7.0, 5.0), 5.0);
        assert_eq!(cutoff(25f64.sqrt(), 5.0), 5.0);
    }

    #[test]
    fn kind_parses_cli_names() {
        assert_eq!("w2".parse::<BaseDistanceKind>().unwrap(), BaseDistanceKind::Wasserstein2);
        assert_eq!("hellinger".parse::<BaseDistanceKind>().unwrap(), BaseDistanceKind::Hellinger);
        assert_eq!("euclidean".parse::<BaseDistanceKind>().unwrap(), BaseDistanceKind::EuclideanDirac);
        assert!("l1".parse::<BaseDistanceKind>().is_err());
        assert_eq!(serde_json::to_string(&BaseDistanceKind::Wasserstein2).unwrap(), "\"w2\"");
    }
}
