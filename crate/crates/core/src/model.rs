//! Multi-Bernoulli set densities and metric parameters.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::linalg::{SquareMatrix, SymmetricEigen};
use crate::scalar::Scalar;

/// Single-object density conditioned on existence.
#[derive(Debug, Clone, PartialEq)]
pub enum SingleObjectDensity<T> {
    Gaussian { mean: Vec<T>, cov: SquareMatrix<T> },
    Dirac { location: Vec<T> },
}

impl<T: Scalar> SingleObjectDensity<T> {
    /// Validated Gaussian. The covariance is symmetrized; eigenvalues in
    /// `[-1e-9, 0)` that are not already zero at machine precision are
    /// clamped to zero and the matrix is rebuilt.
    pub fn gaussian(mean: Vec<T>, cov: SquareMatrix<T>) -> Result<Self> {
        Self::gaussian_at(0, mean, cov)
    }

    pub(crate) fn gaussian_at(index: usize, mean: Vec<T>, cov: SquareMatrix<T>) -> Result<Self> {
        if cov.dim() != mean.len() {
            return Err(Error::DimensionMismatch { expected: mean.len(), found: cov.dim() });
        }
        if !mean.iter().all(|x| x.is_finite()) || !cov.is_finite() {
            return Err(Error::NonFinite(format!("gaussian parameters of component {index}")));
        }
        let cov = cov.symmetrized();
        let eig = SymmetricEigen::new(&cov);
        let cov = match eig.min_value() {
            Some(min) if min < -T::psd_tol() => {
                return Err(Error::NotPsd { index, min_eigenvalue: min.as_f64() });
            }
            Some(min) if min < -round_off(&cov) => eig.reconstruct_with(|l| l.max(T::zero())),
            _ => cov,
        };
        Ok(Self::Gaussian { mean, cov })
    }

    pub fn dirac(location: Vec<T>) -> Result<Self> {
        if !location.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("dirac location".into()));
        }
        Ok(Self::Dirac { location })
    }

    /// 1-D Gaussian convenience constructor.
    pub fn gaussian_1d(mean: T, variance: T) -> Result<Self> {
        Self::gaussian(vec![mean], SquareMatrix::from_diagonal(&[variance]))
    }

    pub fn dim(&self) -> usize {
        self.mean().len()
    }

    /// Mean of a Gaussian or location of a Dirac.
    pub fn mean(&self) -> &[T] {
        match self {
            Self::Gaussian { mean, .. } => mean,
            Self::Dirac { location } => location,
        }
    }

    pub fn covariance(&self) -> Option<&SquareMatrix<T>> {
        match self {
            Self::Gaussian { cov, .. } => Some(cov),
            Self::Dirac { .. } => None,
        }
    }

    pub fn is_dirac(&self) -> bool {
        matches!(self, Self::Dirac { .. })
    }

    /// Total order used to canonicalize argument order so that every
    /// distance is bitwise symmetric.
    pub(crate) fn canonical_cmp(&self, other: &Self) -> Ordering {
        fn slices<T: Scalar>(a: &[T], b: &[T]) -> Ordering {
            for (x, y) in a.iter().zip(b) {
                match x.partial_cmp(y) {
                    Some(Ordering::Equal) | None => {}
                    Some(o) => return o,
                }
            }
            a.len().cmp(&b.len())
        }
        match (self, other) {
            (Self::Dirac { location: a }, Self::Dirac { location: b }) => slices(a, b),
            (Self::Dirac { .. }, Self::Gaussian { .. }) => Ordering::Less,
            (Self::Gaussian { .. }, Self::Dirac { .. }) => Ordering::Greater,
            (Self::Gaussian { mean: ma, cov: ca }, Self::Gaussian { mean: mb, cov: cb }) => {
                slices(ma, mb).then_with(|| slices(ca.as_slice(), cb.as_slice()))
            }
        }
    }
}

/// Eigenvalue magnitude indistinguishable from zero for this matrix.
fn round_off<T: Scalar>(m: &SquareMatrix<T>) -> T {
    T::epsilon() * T::lit(64.0) * T::lit(m.dim().max(1) as f64) * m.max_abs()
}

/// Loader options.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ValidationOptions {
    /// Admit components with `r = 0`. They carry no information and leave
    /// every metric value unchanged, but the metric loses definiteness.
    pub allow_zero_existence: bool,
}

impl ValidationOptions {
    pub fn relaxed() -> Self {
        Self { allow_zero_existence: true }
    }
}

/// Bernoulli set density: empty with probability `1 - r`, otherwise a single
/// object distributed according to `density`.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliComponent<T> {
    r: T,
    density: SingleObjectDensity<T>,
}

impl<T: Scalar> BernoulliComponent<T> {
    /// `0 < r <= 1`.
    pub fn new(r: T, density: SingleObjectDensity<T>) -> Result<Self> {
        Self::with_options(r, density, ValidationOptions::default())
    }

    pub fn with_options(r: T, density: SingleObjectDensity<T>, opts: ValidationOptions) -> Result<Self> {
        check_existence(0, r, opts)?;
        Ok(Self { r, density })
    }

    pub fn r(&self) -> T {
        self.r
    }

    pub fn density(&self) -> &SingleObjectDensity<T> {
        &self.density
    }
}

fn check_existence<T: Scalar>(index: usize, r: T, opts: ValidationOptions) -> Result<()> {
    let lower_ok = if opts.allow_zero_existence { r >= T::zero() } else { r > T::zero() };
    if !(lower_ok && r <= T::one()) {
        return Err(Error::ExistenceOutOfRange { index, r: r.as_f64() });
    }
    Ok(())
}

/// Multi-Bernoulli density: an ordered list of independent Bernoulli
/// components. The empty list is the certainly-empty set density.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MbDensity<T> {
    components: Vec<BernoulliComponent<T>>,
}

impl<T: Scalar> MbDensity<T> {
    pub fn empty() -> Self {
        Self { components: Vec::new() }
    }

    /// Checks that all components share one dimension.
    pub fn new(components: Vec<BernoulliComponent<T>>) -> Result<Self> {
        if let Some(first) = components.first() {
            let dim = first.density.dim();
            for c in &components[1..] {
                if c.density.dim() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: c.density.dim() });
                }
            }
        }
        Ok(Self { components })
    }

    /// Ground-truth style MB: one `r = 1` Dirac component per point.
    pub fn from_points(points: &[Vec<T>]) -> Result<Self> {
        let comps = points
            .iter()
            .map(|p| BernoulliComponent::new(T::one(), SingleObjectDensity::dirac(p.clone())?))
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }

    pub fn components(&self) -> &[BernoulliComponent<T>] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Dimension shared by the components, `None` for the empty MB.
    pub fn dim(&self) -> Option<usize> {
        self.components.first().map(|c| c.density.dim())
    }

    /// Expected number of objects.
    pub fn expected_cardinality(&self) -> T {
        crate::scalar::sum(self.components.iter().map(|c| c.r))
    }

    /// Appends `k` components with zero existence probability. Such an MB is
    /// only producible under relaxed validation; the metric ignores the
    /// padded densities entirely.
    pub fn append_zero_components(&self, k: usize) -> Self {
        let dim = self.dim().unwrap_or(1);
        let pad = BernoulliComponent {
            r: T::zero(),
            density: SingleObjectDensity::Gaussian {
                mean: vec![T::zero(); dim],
                cov: SquareMatrix::identity(dim),
            },
        };
        let mut components = self.components.clone();
        components.extend(std::iter::repeat_n(pad, k));
        Self { components }
    }

    /// Total order over MBs (length first, then component parameters).
    pub(crate) fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| {
            for (a, b) in self.components.iter().zip(&other.components) {
                let o = a
                    .r
                    .partial_cmp(&b.r)
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| a.density.canonical_cmp(&b.density));
                if o != Ordering::Equal {
                    return o;
                }
            }
            Ordering::Equal
        })
    }
}

/// Builds an MB component by component, reporting the offending index.
pub(crate) fn build_mb<T: Scalar>(
    parts: Vec<(T, SingleObjectDensity<T>)>,
    opts: ValidationOptions,
) -> Result<MbDensity<T>> {
    let mut components = Vec::with_capacity(parts.len());
    let mut dim = None;
    for (index, (r, density)) in parts.into_iter().enumerate() {
        check_existence(index, r, opts)?;
        match dim {
            None => dim = Some(density.dim()),
            Some(d) if d != density.dim() => {
                return Err(Error::DimensionMismatch { expected: d, found: density.dim() })
            }
            _ => {}
        }
        components.push(BernoulliComponent { r, density });
    }
    Ok(MbDensity { components })
}

/// Weighted mixture of MB densities (MBM).
#[derive(Debug, Clone, PartialEq)]
pub struct MbMixture<T> {
    entries: Vec<(T, MbDensity<T>)>,
}

/// Weight-sum drift above which the loader reports a renormalization.
pub const MIXTURE_WARN_TOL: f64 = 1e-6;

impl<T: Scalar> MbMixture<T> {
    /// Renormalizes the weights to sum to one. Returns the mixture and, if
    /// the raw weights were off by more than [`MIXTURE_WARN_TOL`], a warning.
    pub fn new(entries: Vec<(T, MbDensity<T>)>) -> Result<(Self, Option<String>)> {
        if entries.is_empty() {
            return Err(Error::EmptyMixture);
        }
        for (index, (w, _)) in entries.iter().enumerate() {
            if !(w.is_finite() && *w >= T::zero()) {
                return Err(Error::InvalidWeight { index, weight: w.as_f64() });
            }
        }
        let total = crate::scalar::sum(entries.iter().map(|(w, _)| *w));
        if total <= T::zero() {
            return Err(Error::InvalidWeight { index: 0, weight: 0.0 });
        }
        let warning = ((total - T::one()).abs() > T::lit(MIXTURE_WARN_TOL))
            .then(|| format!("mixture weights sum to {total}; renormalized"));
        let entries = if total == T::one() {
            entries
        } else {
            entries.into_iter().map(|(w, mb)| (w / total, mb)).collect()
        };
        Ok((Self { entries }, warning))
    }

    pub fn entries(&self) -> &[(T, MbDensity<T>)] {
        &self.entries
    }
}

/// Cut-off `c`, exponent `p` and cardinality penalty `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricParams<T> {
    c: T,
    p: T,
    alpha: T,
}

impl<T: Scalar> MetricParams<T> {
    /// `c > 0`, `1 <= p < inf`, `0 < alpha <= 2`.
    pub fn new(c: T, p: T, alpha: T) -> Result<Self> {
        if !(c.is_finite() && c > T::zero()) {
            return Err(Error::InvalidParams(format!("cut-off c must be positive, got {c}")));
        }
        if !(p.is_finite() && p >= T::one()) {
            return Err(Error::InvalidParams(format!("exponent p must be in [1, inf), got {p}")));
        }
        if !(alpha > T::zero() && alpha <= T::lit(2.0)) {
            return Err(Error::InvalidParams(format!("alpha must be in (0, 2], got {alpha}")));
        }
        Ok(Self { c, p, alpha })
    }

    pub fn c(&self) -> T {
        self.c
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// `c^p / alpha`: the cost of one unit of unmatched existence mass.
    pub fn unmatched_cost(&self) -> T {
        self.c.powf(self.p) / self.alpha
    }

    /// Whether the four-way decomposition applies (`alpha == 2`).
    pub fn decomposable(&self) -> bool {
        self.alpha == T::lit(2.0)
    }

    pub fn with_c(&self, c: T) -> Result<Self> {
        Self::new(c, self.p, self.alpha)
    }
}
