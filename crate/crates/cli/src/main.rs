//! `pgospa` command-line tool.
//!
//! Exit codes: 0 success, 1 property violation, 2 unreadable or malformed
//! input, 3 input that parses but is semantically invalid.

mod oracle;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pgospa::io::result_json;
use pgospa::montecarlo::{self, EstimateSource, SynthConfig};
use pgospa::selfcheck::{run_selfcheck, SelfCheckConfig, SwappingSolver};
use pgospa::sweep::{self, SweepSpec, SweepVariable};
use pgospa::table::emit;
use pgospa::{
    gospa, mbm_pgospa_detailed, pgospa, BaseDistanceKind, Decomposition, Document, Error, ExactSolver, MbDensity,
    MetricParams, ValidationOptions,
};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "pgospa", version, about = "Probabilistic GOSPA metric between multi-Bernoulli densities")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// Cut-off distance [default: 10]
    #[arg(long, global = true)]
    c: Option<f64>,
    /// Exponent, at least 1 [default: 2]
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Cardinality mismatch weight in (0, 2] [default: 2]
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Base distance: w2, hellinger or euclidean [default: w2]
    #[arg(long, global = true)]
    base: Option<BaseDistanceKind>,
    /// Seed for randomized commands
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

impl Global {
    fn params(&self) -> pgospa::Result<MetricParams<f64>> {
        MetricParams::new(self.c.unwrap_or(10.0), self.p.unwrap_or(2.0), self.alpha.unwrap_or(2.0))
    }

    fn base(&self) -> BaseDistanceKind {
        self.base.unwrap_or_default()
    }
}

#[derive(Subcommand)]
enum Command {
    /// Metric between two files (MB, MB mixture or point set)
    Eval { x: PathBuf, y: PathBuf },
    /// GOSPA between two point-set files
    Gospa { x: PathBuf, y: PathBuf },
    /// Heatmap of a single Bernoulli against a point truth over (r, sigma2)
    SweepExample1,
    /// Metric and decomposition of two MBs over a range of cut-offs
    SweepExample2 {
        /// Scenario file with `x` and `y` MBs [default: bundled scenario]
        scenario: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        c_start: f64,
        #[arg(long, default_value_t = 10.0)]
        c_stop: f64,
        #[arg(long, default_value_t = 0.1)]
        c_step: f64,
    },
    /// RMS metric over a directory of Monte Carlo runs
    Montecarlo {
        dir: PathBuf,
        #[arg(long, value_enum, default_value_t = Estimates::Densities)]
        estimates: Estimates,
    },
    /// Write a synthetic run directory for `montecarlo`
    SynthRuns {
        dir: PathBuf,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, default_value_t = 4)]
        objects: usize,
        /// Also write point estimates from components above this existence
        /// probability in the highest-weight MB
        #[arg(long)]
        estimator_threshold: Option<f64>,
    },
    /// Run the bundled property suites
    Selfcheck {
        #[arg(long, default_value_t = 200)]
        cases: usize,
        /// Use a solver that returns suboptimal assignments
        #[arg(long)]
        inject_fault: bool,
        /// Where to write the first counterexample [default: stderr]
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Reference computations
    #[command(subcommand)]
    Oracle(oracle::OracleCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum Estimates {
    Densities,
    Points,
}

enum Failure {
    Violation,
    Error(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Error(e)
    }
}

type Outcome = Result<(), Failure>;

fn exit_code(e: &Error) -> u8 {
    match e {
        e if e.is_parse() => 2,
        Error::Io { .. } => 2,
        _ => 3,
    }
}

pub(crate) fn print_json(out: Option<&Path>, value: &Value) -> pgospa::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(out, &text)
}

fn decomposition_json(d: &Decomposition<f64>) -> Value {
    json!({
        "localization": d.localization,
        "existence_mismatch": d.existence_mismatch,
        "missed": d.missed,
        "false": d.false_detection,
    })
}

fn load_mb(doc: Document) -> pgospa::Result<MbDensity<f64>> {
    doc.into_mb(ValidationOptions::relaxed())
}

fn mixture_eval(
    mix: pgospa::io::RawMixture,
    reference: MbDensity<f64>,
    mixture_first: bool,
    g: &Global,
) -> pgospa::Result<Value> {
    let params = g.params()?;
    let (mix, warning) = mix.validate::<f64>(ValidationOptions::relaxed())?;
    if let Some(w) = warning {
        eprintln!("warning: {w}");
    }
    let res = mbm_pgospa_detailed(&mix, &reference, &params, g.base())?;
    let decomposition = res.decomposition.map_or(Value::Null, |d| {
        let d = if mixture_first { d } else { Decomposition { missed: d.false_detection, false_detection: d.missed, ..d } };
        decomposition_json(&d)
    });
    let entries: Vec<Value> = res.entries.iter().map(|(w, r)| json!({"weight": w, "total": r.total})).collect();
    Ok(json!({
        "total": res.total,
        "p": params.p(),
        "decomposition": decomposition,
        "entries": entries,
        "base": g.base().name(),
        "c": params.c(),
        "alpha": params.alpha(),
    }))
}

fn cmd_eval(x: &Path, y: &Path, g: &Global) -> Outcome {
    let (dx, dy) = (Document::load(x)?, Document::load(y)?);
    let value = match (dx, dy) {
        (Document::Mixture(_), Document::Mixture(_)) => {
            return Err(Error::InvalidParams("at most one argument may be a mixture".into()).into())
        }
        (Document::Mixture(m), other) => mixture_eval(m, load_mb(other)?, true, g)?,
        (other, Document::Mixture(m)) => mixture_eval(m, load_mb(other)?, false, g)?,
        (Document::Points(a), Document::Points(b)) => {
            let params = g.params()?;
            let res = gospa(&a.to_points::<f64>()?, &b.to_points::<f64>()?, &params)?;
            result_json(&res, &params, BaseDistanceKind::EuclideanDirac)
        }
        (a, b) => {
            let params = g.params()?;
            let res = pgospa(&load_mb(a)?, &load_mb(b)?, &params, g.base())?;
            result_json(&res, &params, g.base())
        }
    };
    print_json(g.out.as_deref(), &value)?;
    Ok(())
}

fn cmd_gospa(x: &Path, y: &Path, g: &Global) -> Outcome {
    let points = |p: &Path| -> pgospa::Result<Vec<Vec<f64>>> {
        match Document::load(p)? {
            Document::Points(raw) => raw.to_points(),
            _ => Err(Error::UnknownDocument { expected: "a point set ({\"points\": [...]})" }),
        }
    };
    let params = g.params()?;
    let res = gospa(&points(x)?, &points(y)?, &params)?;
    print_json(g.out.as_deref(), &result_json(&res, &params, BaseDistanceKind::EuclideanDirac))?;
    Ok(())
}

fn cmd_sweep_example1(g: &Global) -> Outcome {
    let rows = sweep::example1(&sweep::example1_r_grid(), &sweep::example1_sigma2_grid())?;
    emit(g.out.as_deref(), &sweep::example1_csv(&rows))?;
    Ok(())
}

fn cmd_sweep_example2(scenario: Option<&Path>, start: f64, stop: f64, step: f64, g: &Global) -> Outcome {
    let sc = match scenario {
        Some(path) => pgospa::io::load_scenario(path)?,
        None => sweep::example2_scenario(),
    };
    let alpha = g.alpha.or(sc.alpha).unwrap_or(2.0);
    if alpha != 2.0 {
        return Err(Error::InvalidParams(format!("the decomposition sweep needs alpha = 2, got {alpha}")).into());
    }
    let p = g.p.or(sc.p).unwrap_or(1.0);
    let base = g.base.or(sc.base).unwrap_or_default();
    let x = sc.x.validate(ValidationOptions::relaxed())?;
    let y = sc.y.validate(ValidationOptions::relaxed())?;
    let spec = SweepSpec::new(SweepVariable::C, start, stop, step)?;
    let rows = sweep::cutoff_sweep(&x, &y, &spec.values(), p, base)?;
    emit(g.out.as_deref(), &sweep::cutoff_csv(&rows))?;
    Ok(())
}

fn cmd_montecarlo(dir: &Path, estimates: Estimates, g: &Global) -> Outcome {
    let source = match estimates {
        Estimates::Densities => EstimateSource::Densities,
        Estimates::Points => EstimateSource::Points,
    };
    let csv = montecarlo::montecarlo_csv(dir, &g.params()?, g.base(), source)?;
    emit(g.out.as_deref(), &csv)?;
    Ok(())
}

fn cmd_selfcheck(cases: usize, inject_fault: bool, dump: Option<&Path>, g: &Global) -> Outcome {
    let cfg = SelfCheckConfig { seed: g.seed, cases };
    let report = if inject_fault {
        run_selfcheck(&cfg, &SwappingSolver)?
    } else {
        run_selfcheck(&cfg, &ExactSolver)?
    };
    emit(g.out.as_deref(), &report.render())?;
    if let Some(ce) = &report.counterexample {
        let text = serde_json::to_string_pretty(ce).map_err(Error::from)? + "\n";
        match dump {
            Some(path) => std::fs::write(path, text).map_err(|e| Error::Io { path: path.display().to_string(), source: e })?,
            None => eprint!("counterexample: {text}"),
        }
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Violation)
    }
}

fn run(cli: Cli) -> Outcome {
    let g = &cli.global;
    match cli.command {
        Command::Eval { x, y } => cmd_eval(&x, &y, g),
        Command::Gospa { x, y } => cmd_gospa(&x, &y, g),
        Command::SweepExample1 => cmd_sweep_example1(g),
        Command::SweepExample2 { scenario, c_start, c_stop, c_step } => {
            cmd_sweep_example2(scenario.as_deref(), c_start, c_stop, c_step, g)
        }
        Command::Montecarlo { dir, estimates } => cmd_montecarlo(&dir, estimates, g),
        Command::SynthRuns { dir, runs, steps, objects, estimator_threshold } => {
            let cfg = SynthConfig { runs, steps, objects, seed: g.seed, estimator_threshold };
            montecarlo::synth_runs(&dir, &cfg)?;
            Ok(())
        }
        Command::Selfcheck { cases, inject_fault, dump } => cmd_selfcheck(cases, inject_fault, dump.as_deref(), g),
        Command::Oracle(cmd) => oracle::run(cmd, g.params()?, g.base(), g.out.as_deref()).map_err(Failure::from),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation) => ExitCode::from(1),
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
