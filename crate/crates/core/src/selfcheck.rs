//! Seeded property suites bundled with the library.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::assignment::{enumerate_assignment, AssignmentSolver, CostMatrix, ExactSolver};
use crate::base::BaseDistanceKind;
use crate::error::Result;
use crate::generate::{random_existence, random_mb_upto, random_params, random_point, random_points_upto};
use crate::io::RawMb;
use crate::metric::{bernoulli_pgospa, gospa, pgospa_with_solver};
use crate::model::{BernoulliComponent, MbDensity, MetricParams, SingleObjectDensity};
use crate::oracles::{bernoulli_ot_dirac, brute_force_assignment_sets, brute_force_pgospa};

const W2: BaseDistanceKind = BaseDistanceKind::Wasserstein2;

/// Exact solver whose answer is then spoiled by exchanging the columns of
/// the first two pairs.
#[derive(Debug, Default, Clone, Copy)]
pub struct SwappingSolver;

impl AssignmentSolver<f64> for SwappingSolver {
    fn solve(&self, costs: &CostMatrix<f64>) -> crate::assignment::Assignment<f64> {
        let mut a = ExactSolver.solve(costs);
        if a.pairs.len() >= 2 {
            let j = a.pairs[0].1;
            a.pairs[0].1 = a.pairs[1].1;
            a.pairs[1].1 = j;
            a.total_cost = costs.cost_of(&a.pairs);
        }
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfCheckConfig {
    pub seed: u64,
    /// Instances per suite.
    pub cases: usize,
}

impl Default for SelfCheckConfig {
    fn default() -> Self {
        Self { seed: 0, cases: 200 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfCheckReport {
    pub suites: Vec<SuiteOutcome>,
    /// The first violating instance.
    pub counterexample: Option<Value>,
}

impl SelfCheckReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.violations == 0)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            let status = if s.violations == 0 { "ok" } else { "FAILED" };
            out.push_str(&format!("{:<22} {:>6} cases {:>6} violations  {status}\n", s.name, s.cases, s.violations));
        }
        out.push_str(if self.passed() { "selfcheck passed\n" } else { "selfcheck failed\n" });
        out
    }
}

fn params_json(p: &MetricParams<f64>) -> Value {
    json!({"c": p.c(), "p": p.p(), "alpha": p.alpha()})
}

fn mb_json(mb: &MbDensity<f64>) -> Value {
    serde_json::to_value(RawMb::from_mb(mb)).expect("MB serializes")
}

struct Suite<'a> {
    name: &'static str,
    cases: usize,
    violations: usize,
    first: &'a mut Option<Value>,
}

impl Suite<'_> {
    fn check(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        self.cases += 1;
        if !ok {
            self.violations += 1;
            if self.first.is_none() {
                let mut w = witness();
                w["suite"] = json!(self.name);
                *self.first = Some(w);
            }
        }
    }

    fn finish(self) -> SuiteOutcome {
        SuiteOutcome { name: self.name, cases: self.cases, violations: self.violations }
    }
}

/// Runs every suite with `solver` inside the metric. Deterministic in
/// `cfg`.
pub fn run_selfcheck(cfg: &SelfCheckConfig, solver: &dyn AssignmentSolver<f64>) -> Result<SelfCheckReport> {
    let mut first = None;
    let mut suites = Vec::new();
    let rng_for = |stream: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(stream);
        rng
    };

    let mut s = Suite { name: "assignment", cases: 0, violations: 0, first: &mut first };
    let mut rng = rng_for(1);
    for _ in 0..cfg.cases {
        let (m, n) = (rng.random_range(0..=6), rng.random_range(0..=6));
        let data: Vec<f64> = (0..m * n).map(|_| rng.random_range(0.0..10.0)).collect();
        let costs = CostMatrix::new(m, n, data.clone())?;
        let got = solver.solve(&costs);
        let want = enumerate_assignment(&costs)?;
        s.check((got.total_cost - want.total_cost).abs() <= 1e-12, || {
            json!({"rows": m, "cols": n, "costs": data, "solver": got.total_cost, "enumeration": want.total_cost})
        });
    }
    suites.push(s.finish());

    let mut s = Suite { name: "brute-force", cases: 0, violations: 0, first: &mut first };
    let mut rng = rng_for(2);
    for _ in 0..cfg.cases {
        let dim = rng.random_range(1..=3);
        let x = random_mb_upto(&mut rng, 5, dim, 0.3);
        let y = random_mb_upto(&mut rng, 5, dim, 0.3);
        let params = random_params(&mut rng);
        let got = pgospa_with_solver(&x, &y, &params, W2, solver)?;
        let want = brute_force_pgospa(&x, &y, &params, W2)?;
        let mut ok = (got.total - want).abs() <= 1e-12;
        let mut sets = Value::Null;
        if let Some(d) = got.decomposition {
            let opt = brute_force_assignment_sets(&x, &y, &params, W2)?;
            ok &= (opt.value - want).abs() <= 1e-12;
            ok &= (d.sum() - got.total.powf(params.p())).abs() <= 1e-9;
            sets = json!(opt.value);
        }
        s.check(ok, || {
            json!({"x": mb_json(&x), "y": mb_json(&y), "params": params_json(&params),
                   "pgospa": got.total, "brute_force": want, "assignment_sets": sets})
        });
    }
    suites.push(s.finish());

    let mut s = Suite { name: "metric-axioms", cases: 0, violations: 0, first: &mut first };
    let mut rng = rng_for(3);
    for _ in 0..cfg.cases {
        let dim = rng.random_range(1..=3);
        let mbs: Vec<_> = (0..3).map(|_| random_mb_upto(&mut rng, 5, dim, 0.3)).collect();
        let params = random_params(&mut rng);
        let d = |a: &MbDensity<f64>, b: &MbDensity<f64>| pgospa_with_solver(a, b, &params, W2, solver).map(|r| r.total);
        let (xy, yx, xz, zy, xx) = (d(&mbs[0], &mbs[1])?, d(&mbs[1], &mbs[0])?, d(&mbs[0], &mbs[2])?, d(&mbs[2], &mbs[1])?, d(&mbs[0], &mbs[0])?);
        let ok = xy >= 0.0 && (xy - yx).abs() <= 1e-12 && xx <= 1e-12 && xy <= xz + zy + 1e-9;
        s.check(ok, || {
            json!({"x": mb_json(&mbs[0]), "y": mb_json(&mbs[1]), "z": mb_json(&mbs[2]),
                   "params": params_json(&params), "d_xy": xy, "d_yx": yx, "d_xz": xz, "d_zy": zy, "d_xx": xx})
        });
    }
    suites.push(s.finish());

    let mut s = Suite { name: "gospa-reduction", cases: 0, violations: 0, first: &mut first };
    let mut rng = rng_for(4);
    for _ in 0..cfg.cases {
        let dim = rng.random_range(1..=3);
        let a = random_points_upto(&mut rng, 6, dim);
        let b = random_points_upto(&mut rng, 6, dim);
        let params = random_params(&mut rng);
        let lifted =
            pgospa_with_solver(&MbDensity::from_points(&a)?, &MbDensity::from_points(&b)?, &params, W2, solver)?.total;
        let direct = gospa(&a, &b, &params)?.total;
        s.check((lifted - direct).abs() <= 1e-12, || {
            json!({"x": a, "y": b, "params": params_json(&params), "pgospa": lifted, "gospa": direct})
        });
    }
    suites.push(s.finish());

    let mut s = Suite { name: "dirac-transport", cases: 0, violations: 0, first: &mut first };
    let mut rng = rng_for(5);
    for _ in 0..cfg.cases {
        let dim = rng.random_range(1..=3);
        let (x, y) = (random_point(&mut rng, dim, 5.0), random_point(&mut rng, dim, 5.0));
        let (rx, ry) = (random_existence(&mut rng), random_existence(&mut rng));
        let params = random_params(&mut rng);
        let ot = bernoulli_ot_dirac(rx, &x, ry, &y, &params)?;
        let bx = BernoulliComponent::new(rx, SingleObjectDensity::dirac(x.clone())?)?;
        let by = BernoulliComponent::new(ry, SingleObjectDensity::dirac(y.clone())?)?;
        let direct = bernoulli_pgospa(&bx, &by, &params, W2)?;
        s.check((ot - direct).abs() <= 1e-12, || {
            json!({"x": x, "y": y, "rx": rx, "ry": ry, "params": params_json(&params), "transport": ot, "pgospa": direct})
        });
    }
    suites.push(s.finish());

    Ok(SelfCheckReport { suites, counterexample: first })
}
