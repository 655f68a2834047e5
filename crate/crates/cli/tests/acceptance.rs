//! Acceptance criteria. Run with `cargo test --test acceptance`; prints one
//! line per criterion and exits nonzero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use pgospa::assignment::{enumerate_assignment, solve_assignment, CostMatrix};
use pgospa::generate::{random_existence, random_mb_upto, random_params, random_point, random_points_upto};
use pgospa::montecarlo::{aggregate, load_run_series, rms, EstimateSource};
use pgospa::oracles::{
    bernoulli_ot_dirac, bernoulli_ot_grid, brute_force_assignment_sets, brute_force_pgospa, grid_slack, qospa_base,
};
use pgospa::{
    bernoulli_pgospa, gospa, pgospa, BaseDistanceKind, BernoulliComponent, MbDensity, MetricParams,
    SingleObjectDensity,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// tolerances
const HEATMAP_TOL: f64 = 1e-9;
const EXACT_TOL: f64 = 1e-12;
const TRIANGLE_TOL: f64 = 1e-9;
const DECOMPOSITION_TOL: f64 = 1e-9;
const RMS_TOL: f64 = 1e-12;

// budgets
const AC1_BUDGET: Duration = Duration::from_secs(5);
const AC2_BUDGET: Duration = Duration::from_secs(10);
const AC3_BUDGET: Duration = Duration::from_secs(60);
const AC4_BUDGET: Duration = Duration::from_secs(60);
const AC5_BUDGET: Duration = Duration::from_secs(5);
const AC6_BUDGET: Duration = Duration::from_secs(120);
const AC7_BUDGET: Duration = Duration::from_secs(1);
const AC8_LARGE_BUDGET: Duration = Duration::from_secs(1);

const W2: BaseDistanceKind = BaseDistanceKind::Wasserstein2;

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(20_240_601);
    r.set_stream(stream);
    r
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pgospa"))
}

struct Verdict {
    ok: bool,
    detail: String,
}

impl Verdict {
    fn new(ok: bool, detail: impl Into<String>) -> Self {
        Self { ok, detail: detail.into() }
    }
}

fn within(elapsed: Duration, budget: Duration) -> bool {
    elapsed < budget
}

fn ac1_heatmap() -> Verdict {
    let start = Instant::now();
    let out = bin().arg("sweep-example1").output().expect("binary runs");
    if !out.status.success() {
        return Verdict::new(false, "sweep-example1 failed");
    }
    let text = String::from_utf8(out.stdout).unwrap();
    let mut worst = 0.0f64;
    let mut rows = 0;
    let (mut corner, mut r0_ok, mut flat_ok) = (None, true, true);
    let mut by_r: std::collections::BTreeMap<String, Vec<(f64, f64)>> = Default::default();
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let (r, s2, d) = (v[0], v[1], v[2]);
        let want = 5.0f64.min((4.0 + s2).sqrt()) * r + 2.5 * (1.0 - r);
        worst = worst.max((d - want).abs());
        rows += 1;
        if r == 1.0 && s2 == 0.0 {
            corner = Some(d);
        }
        if r == 0.0 {
            r0_ok &= (d - 2.5).abs() <= HEATMAP_TOL;
        }
        if s2 >= 21.0 {
            by_r.entry(format!("{r}")).or_default().push((s2, d));
        }
    }
    for vals in by_r.values() {
        flat_ok &= vals.iter().all(|&(_, d)| (d - vals[0].1).abs() <= HEATMAP_TOL);
    }
    let elapsed = start.elapsed();
    let corner_ok = corner.is_some_and(|d| (d - 2.0).abs() <= HEATMAP_TOL);
    Verdict::new(
        rows == 101 * 301 && worst <= HEATMAP_TOL && corner_ok && r0_ok && flat_ok && within(elapsed, AC1_BUDGET),
        format!("{rows} rows, max |err| {worst:.2e} (tol {HEATMAP_TOL:e}), corner {corner:?}, {elapsed:.2?} (budget {AC1_BUDGET:?})"),
    )
}

fn ac2_gospa_reduction() -> Verdict {
    let start = Instant::now();
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let dim = r.random_range(1..=3);
        let a = random_points_upto(&mut r, 6, dim);
        let b = random_points_upto(&mut r, 6, dim);
        let p = random_params(&mut r);
        let lifted = pgospa(&MbDensity::from_points(&a).unwrap(), &MbDensity::from_points(&b).unwrap(), &p, W2)
            .unwrap()
            .total;
        worst = worst.max((lifted - gospa(&a, &b, &p).unwrap().total).abs());
    }
    let elapsed = start.elapsed();
    Verdict::new(
        worst <= EXACT_TOL && within(elapsed, AC2_BUDGET),
        format!("1000 pairs, max |diff| {worst:.2e} (tol {EXACT_TOL:e}), {elapsed:.2?} (budget {AC2_BUDGET:?})"),
    )
}

fn ac3_metric_axioms() -> Verdict {
    let start = Instant::now();
    let mut r = rng(3);
    let (mut tri, mut sym, mut ident, mut neg) = (0, 0.0f64, 0.0f64, 0);
    for _ in 0..10_000 {
        let dim = r.random_range(1..=3);
        let x = random_mb_upto(&mut r, 5, dim, 0.3);
        let y = random_mb_upto(&mut r, 5, dim, 0.3);
        let z = random_mb_upto(&mut r, 5, dim, 0.3);
        let p = random_params(&mut r);
        let d = |a: &MbDensity<f64>, b: &MbDensity<f64>| pgospa(a, b, &p, W2).unwrap().total;
        let xy = d(&x, &y);
        if xy < 0.0 {
            neg += 1;
        }
        sym = sym.max((xy - d(&y, &x)).abs());
        ident = ident.max(d(&x, &x));
        if xy > d(&x, &z) + d(&z, &y) + TRIANGLE_TOL {
            tri += 1;
        }
    }
    let elapsed = start.elapsed();
    Verdict::new(
        tri == 0 && neg == 0 && sym <= EXACT_TOL && ident <= EXACT_TOL && within(elapsed, AC3_BUDGET),
        format!(
            "10000 triples, {tri} triangle violations (tol {TRIANGLE_TOL:e}), {neg} negative, max asymmetry {sym:.2e}, \
             max d(f,f) {ident:.2e} (tol {EXACT_TOL:e}), {elapsed:.2?} (budget {AC3_BUDGET:?})"
        ),
    )
}

fn ac4_oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let mut r = rng(4);
    let (mut worst_perm, mut worst_sets, mut worst_dec) = (0.0f64, 0.0f64, 0.0f64);
    let mut decomposable = 0;
    for k in 0..1000 {
        let dim = r.random_range(1..=3);
        let x = random_mb_upto(&mut r, 6, dim, 0.3);
        let y = random_mb_upto(&mut r, 6, dim, 0.3);
        let drawn = random_params(&mut r);
        let p = if k % 2 == 0 { MetricParams::new(drawn.c(), drawn.p(), 2.0).unwrap() } else { drawn };
        let got = pgospa(&x, &y, &p, W2).unwrap();
        worst_perm = worst_perm.max((got.total - brute_force_pgospa(&x, &y, &p, W2).unwrap()).abs());
        if let Some(dec) = got.decomposition {
            decomposable += 1;
            let sets = brute_force_assignment_sets(&x, &y, &p, W2).unwrap();
            worst_sets = worst_sets.max((got.total - sets.value).abs());
            worst_dec = worst_dec.max((dec.sum() - got.total.powf(p.p())).abs());
        }
    }
    let elapsed = start.elapsed();
    Verdict::new(
        worst_perm <= EXACT_TOL && worst_sets <= EXACT_TOL && worst_dec <= DECOMPOSITION_TOL && within(elapsed, AC4_BUDGET),
        format!(
            "1000 pairs ({decomposable} with alpha=2), max |pgospa - permutations| {worst_perm:.2e}, \
             max |pgospa - assignment sets| {worst_sets:.2e} (tol {EXACT_TOL:e}), max |terms - total^p| {worst_dec:.2e} \
             (tol {DECOMPOSITION_TOL:e}), {elapsed:.2?} (budget {AC4_BUDGET:?})"
        ),
    )
}

fn ac5_dirac_transport() -> Verdict {
    let start = Instant::now();
    let mut r = rng(5);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let dim = r.random_range(1..=3);
        let (x, y) = (random_point(&mut r, dim, 5.0), random_point(&mut r, dim, 5.0));
        let (rx, ry) = (random_existence(&mut r), random_existence(&mut r));
        let p = random_params(&mut r);
        let ot = bernoulli_ot_dirac(rx, &x, ry, &y, &p).unwrap();
        let bx = BernoulliComponent::new(rx, SingleObjectDensity::dirac(x).unwrap()).unwrap();
        let by = BernoulliComponent::new(ry, SingleObjectDensity::dirac(y).unwrap()).unwrap();
        worst = worst.max((ot - bernoulli_pgospa(&bx, &by, &p, W2).unwrap()).abs());
    }
    let elapsed = start.elapsed();
    Verdict::new(
        worst <= EXACT_TOL && within(elapsed, AC5_BUDGET),
        format!("1000 pairs, max |diff| {worst:.2e} (tol {EXACT_TOL:e}), {elapsed:.2?} (budget {AC5_BUDGET:?})"),
    )
}

fn ac6_grid_bound() -> Verdict {
    let start = Instant::now();
    let mut r = rng(6);
    let (mut violations, mut not_shrinking) = (0, 0);
    let mut worst_margin = f64::INFINITY;
    let mut ratio_sum = 0.0;
    for _ in 0..100 {
        let bern = |r: &mut ChaCha8Rng| {
            let density = SingleObjectDensity::gaussian_1d(r.random_range(-3.0..3.0), r.random_range(0.1..4.0)).unwrap();
            BernoulliComponent::new(random_existence(r), density).unwrap()
        };
        let (bx, by) = (bern(&mut r), bern(&mut r));
        let p = MetricParams::new(
            r.random_range(0.5..=10.0),
            if r.random_bool(0.5) { 1.0 } else { 2.0 },
            r.random_range(0.05..=2.0),
        )
        .unwrap();
        let res = bernoulli_ot_grid(&bx, &by, &p, 400).unwrap();
        let bound = bernoulli_pgospa(&bx, &by, &p, W2).unwrap().powf(p.p());
        let margin = bound + res.eps_grid - res.value_pow;
        worst_margin = worst_margin.min(margin);
        if margin < 0.0 {
            violations += 1;
        }
        let coarse = grid_slack(&bx, &by, &p, 400).unwrap();
        let fine = grid_slack(&bx, &by, &p, 800).unwrap();
        ratio_sum += fine / coarse;
        if fine >= coarse {
            not_shrinking += 1;
        }
    }
    let elapsed = start.elapsed();
    Verdict::new(
        violations == 0 && not_shrinking == 0 && within(elapsed, AC6_BUDGET),
        format!(
            "100 pairs at resolution 400, {violations} bound violations, min slack {worst_margin:.2e}, \
             eps_grid shrank in {} of 100 on doubling (mean ratio {:.3}), {elapsed:.2?} (budget {AC6_BUDGET:?})",
            100 - not_shrinking,
            ratio_sum / 100.0
        ),
    )
}

fn ac7_qospa() -> Verdict {
    let start = Instant::now();
    let p = MetricParams::new(5.0, 1.0, 2.0).unwrap();
    let x = vec![0.7f64, -1.2];
    let q = qospa_base(&x, &x, 0.8, 0.8, &p).unwrap();
    let b = BernoulliComponent::new(0.8, SingleObjectDensity::dirac(x).unwrap()).unwrap();
    let d = bernoulli_pgospa(&b, &b, &p, W2).unwrap();
    let elapsed = start.elapsed();
    Verdict::new(
        (q - 1.8).abs() <= EXACT_TOL && q > 0.0 && d == 0.0 && within(elapsed, AC7_BUDGET),
        format!("qospa_base {q} (expected 1.8, tol {EXACT_TOL:e}), pgospa {d}, {elapsed:.2?} (budget {AC7_BUDGET:?})"),
    )
}

fn ac8_assignment() -> Verdict {
    let mut r = rng(8);
    let mut worst = 0.0f64;
    for k in 0..1000 {
        let (m, n) = (r.random_range(0..=7), r.random_range(0..=7));
        // every fourth matrix uses small integers to force ties
        let data: Vec<f64> = (0..m * n)
            .map(|_| if k % 4 == 0 { r.random_range(0..4) as f64 } else { r.random_range(-50.0..50.0) })
            .collect();
        let c = CostMatrix::new(m, n, data).unwrap();
        worst = worst.max((solve_assignment(&c).total_cost - enumerate_assignment(&c).unwrap().total_cost).abs());
    }
    let data: Vec<f64> = (0..500 * 500).map(|_| r.random_range(0.0..1000.0)).collect();
    let big = CostMatrix::new(500, 500, data).unwrap();
    let start = Instant::now();
    let sol = solve_assignment(&big);
    let elapsed = start.elapsed();
    Verdict::new(
        worst <= EXACT_TOL && sol.pairs.len() == 500 && within(elapsed, AC8_LARGE_BUDGET),
        format!(
            "1000 matrices up to 7x7, max |solver - enumeration| {worst:.2e} (tol {EXACT_TOL:e}), \
             500x500 in {elapsed:.2?} (budget {AC8_LARGE_BUDGET:?})"
        ),
    )
}

fn write(path: &Path, text: &str) {
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(path, text).unwrap();
}

fn ac9_montecarlo() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let synth = dir.path().join("synth");
    let gen = bin()
        .args(["synth-runs", synth.to_str().unwrap(), "--runs", "6", "--steps", "8", "--seed", "17"])
        .status()
        .unwrap();
    let csv = || bin().args(["montecarlo", synth.to_str().unwrap(), "--seed", "17"]).output().unwrap();
    let (a, b) = (csv(), csv());
    let identical = gen.success() && a.status.success() && !a.stdout.is_empty() && a.stdout == b.stdout;

    // truth at 0, two runs with point estimates at distance 3 and 4
    let hand = dir.path().join("hand");
    write(&hand.join("truth/t0000.json"), r#"{"points":[[0.0]]}"#);
    write(&hand.join("runs/a/t0000.json"), r#"{"points":[[3.0]]}"#);
    write(&hand.join("runs/b/t0000.json"), r#"{"points":[[4.0]]}"#);
    let params = MetricParams::new(10.0, 2.0, 2.0).unwrap();
    let series = load_run_series(&hand, &params, W2, EstimateSource::Densities).unwrap();
    let got = aggregate(&series, 2.0)[0].total;
    let direct = rms(&[3.0, 4.0], 2.0);
    let want = 12.5f64.sqrt();
    let hand_ok = (got - want).abs() <= RMS_TOL && (direct - want).abs() <= RMS_TOL;
    Verdict::new(
        identical && hand_ok,
        format!(
            "filter comparison curves out of scope, synthetic runs substituted; repeated seeded runs byte-identical: {identical}; \
             RMS of {{3, 4}} = {got} (expected {want}, tol {RMS_TOL:e})"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("AC1 heatmap closed form", ac1_heatmap),
        ("AC2 GOSPA reduction", ac2_gospa_reduction),
        ("AC3 metric axioms", ac3_metric_axioms),
        ("AC4 oracle equivalence", ac4_oracle_equivalence),
        ("AC5 Dirac transport equality", ac5_dirac_transport),
        ("AC6 grid transport bound", ac6_grid_bound),
        ("AC7 Q-OSPA definiteness failure", ac7_qospa),
        ("AC8 assignment exactness", ac8_assignment),
        ("AC9 Monte Carlo determinism", ac9_montecarlo),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let v = check();
        println!("{} {name}: {}", if v.ok { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.ok);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
