use crate::error::{Error, Result};
use crate::metric::pth_root;
use crate::model::MetricParams;
use crate::scalar::{sum, Scalar};

/// Joint distribution over the four atoms of a pair of Dirac Bernoullis:
/// both absent, only `x`, only `y`, both present.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportPlan<T> {
    pub q_ee: T,
    pub q_ex: T,
    pub q_ey: T,
    pub q_xy: T,
}

impl<T: Scalar> TransportPlan<T> {
    /// The plan with `t` mass on the both-present atom. Marginals:
    /// `q_ex + q_xy = r_x`, `q_ey + q_xy = r_y`, total mass one.
    fn with_joint(rx: T, ry: T, t: T) -> Self {
        Self { q_ee: T::one() - rx - ry + t, q_ex: rx - t, q_ey: ry - t, q_xy: t }
    }

    pub fn total_mass(&self) -> T {
        self.q_ee + self.q_ex + self.q_ey + self.q_xy
    }

    /// Expected cost given the cut-off distance between the two locations.
    pub fn cost(&self, cut_distance: T, params: &MetricParams<T>) -> T {
        self.q_xy * cut_distance.powf(params.p()) + (self.q_ex + self.q_ey) * params.unmatched_cost()
    }
}

fn check_marginals<T: Scalar>(rx: T, ry: T, x: &[T], y: &[T]) -> Result<()> {
    for (name, r) in [("r_x", rx), ("r_y", ry)] {
        if !(r >= T::zero() && r <= T::one()) {
            return Err(Error::InvalidMarginals(format!("{name} = {r} is not a probability")));
        }
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Dirac location".into()));
    }
    Ok(())
}

fn cut_distance<T: Scalar>(x: &[T], y: &[T], c: T) -> T {
    sum(x.iter().zip(y).map(|(&a, &b)| (a - b) * (a - b))).sqrt().min(c)
}

/// The optimal plan in closed form: as much mass as possible on the
/// both-present atom, leaving `1 - max(r_x, r_y)` on both-absent.
pub fn dirac_transport_plan<T: Scalar>(rx: T, x: &[T], ry: T, y: &[T]) -> Result<TransportPlan<T>> {
    check_marginals(rx, ry, x, y)?;
    Ok(TransportPlan::with_joint(rx, ry, rx.min(ry)))
}

/// Optimal transport value (p-th root) between two Dirac Bernoullis, from
/// the closed-form plan.
pub fn bernoulli_ot_dirac<T: Scalar>(rx: T, x: &[T], ry: T, y: &[T], params: &MetricParams<T>) -> Result<T> {
    let plan = dirac_transport_plan(rx, x, ry, y)?;
    Ok(pth_root(plan.cost(cut_distance(x, y, params.c()), params), params.p()))
}

/// The same problem solved by evaluating both vertices of the feasible
/// segment `max(0, r_x + r_y - 1) <= q_xy <= min(r_x, r_y)`. Returns the
/// value (p-th root) and a minimising plan.
pub fn bernoulli_ot_dirac_vertices<T: Scalar>(
    rx: T,
    x: &[T],
    ry: T,
    y: &[T],
    params: &MetricParams<T>,
) -> Result<(T, TransportPlan<T>)> {
    check_marginals(rx, ry, x, y)?;
    let d = cut_distance(x, y, params.c());
    let lo = TransportPlan::with_joint(rx, ry, (rx + ry - T::one()).max(T::zero()));
    let hi = TransportPlan::with_joint(rx, ry, rx.min(ry));
    let (lc, hc) = (lo.cost(d, params), hi.cost(d, params));
    let (cost, plan) = if lc < hc { (lc, lo) } else { (hc, hi) };
    Ok((pth_root(cost, params.p()), plan))
}

/// Base distance `r_x r_y min(d, c) + (1 - r_x r_y) c` between Dirac
/// Bernoullis, which is not definite: it is positive for `x = y` whenever
/// `r_x r_y < 1`.
pub fn qospa_base<T: Scalar>(x: &[T], y: &[T], rx: T, ry: T, params: &MetricParams<T>) -> Result<T> {
    check_marginals(rx, ry, x, y)?;
    let rr = rx * ry;
    Ok(rr * cut_distance(x, y, params.c()) + (T::one() - rr) * params.c())
}
