use std::path::{Path, PathBuf};

use clap::Subcommand;
use pgospa::assignment::{enumerate_assignment, CostMatrix};
use pgospa::oracles::{
    bernoulli_ot_dirac, bernoulli_ot_dirac_vertices, bernoulli_ot_grid, brute_force_assignment_sets,
    brute_force_pgospa, qospa_base,
};
use pgospa::{bernoulli_pgospa, BaseDistanceKind, BernoulliComponent, Document, Error, MetricParams, Result, ValidationOptions};
use serde_json::{json, Value};

use crate::print_json;

#[derive(Subcommand)]
pub enum OracleCommand {
    /// Assignment by enumeration; input `{"costs": [[...], ...]}`
    Assign { costs: PathBuf },
    /// Metric by exhaustive permutation (and assignment-set) search
    Pgospa { x: PathBuf, y: PathBuf },
    /// Four-atom transport between single-component Dirac MBs
    OtDirac { x: PathBuf, y: PathBuf },
    /// Transport between discretized single-component MBs
    OtGrid {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, default_value_t = 400)]
        resolution: usize,
    },
    /// Non-definite base distance between single-component Dirac MBs
    Qospa { x: PathBuf, y: PathBuf },
}

fn single(path: &Path) -> Result<BernoulliComponent<f64>> {
    let mb = Document::load(path)?.into_mb::<f64>(ValidationOptions::relaxed())?;
    match mb.components() {
        [c] => Ok(c.clone()),
        other => Err(Error::InvalidParams(format!(
            "{} must hold exactly one component, found {}",
            path.display(),
            other.len()
        ))),
    }
}

fn dirac(path: &Path) -> Result<(f64, Vec<f64>)> {
    let c = single(path)?;
    if !c.density().is_dirac() {
        return Err(Error::InvalidParams(format!("{} must hold a Dirac component", path.display())));
    }
    Ok((c.r(), c.density().mean().to_vec()))
}

fn load_costs(path: &Path) -> Result<CostMatrix<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
    let value: Value = serde_json::from_str(&text)?;
    let rows: Vec<Vec<f64>> = match value.get("costs") {
        Some(c) => serde_json::from_value(c.clone())?,
        None => return Err(Error::UnknownDocument { expected: "\"costs\"" }),
    };
    CostMatrix::from_rows(&rows)
}

pub fn run(cmd: OracleCommand, params: MetricParams<f64>, base: BaseDistanceKind, out: Option<&Path>) -> Result<()> {
    let value = match cmd {
        OracleCommand::Assign { costs } => {
            let a = enumerate_assignment(&load_costs(&costs)?)?;
            json!({"pairs": a.pairs, "total_cost": a.total_cost})
        }
        OracleCommand::Pgospa { x, y } => {
            let fx = Document::load(&x)?.into_mb::<f64>(ValidationOptions::relaxed())?;
            let fy = Document::load(&y)?.into_mb::<f64>(ValidationOptions::relaxed())?;
            let total = brute_force_pgospa(&fx, &fy, &params, base)?;
            let sets = if params.decomposable() {
                let opt = brute_force_assignment_sets(&fx, &fy, &params, base)?;
                json!({"total": opt.value, "gamma": opt.gamma})
            } else {
                Value::Null
            };
            json!({"total": total, "p": params.p(), "assignment_sets": sets})
        }
        OracleCommand::OtDirac { x, y } => {
            let ((rx, lx), (ry, ly)) = (dirac(&x)?, dirac(&y)?);
            let total = bernoulli_ot_dirac(rx, &lx, ry, &ly, &params)?;
            let (vertex_total, plan) = bernoulli_ot_dirac_vertices(rx, &lx, ry, &ly, &params)?;
            json!({
                "total": total,
                "vertex_total": vertex_total,
                "plan": {"q_ee": plan.q_ee, "q_ex": plan.q_ex, "q_ey": plan.q_ey, "q_xy": plan.q_xy},
            })
        }
        OracleCommand::OtGrid { x, y, resolution } => {
            let (bx, by) = (single(&x)?, single(&y)?);
            let r = bernoulli_ot_grid(&bx, &by, &params, resolution)?;
            let metric = bernoulli_pgospa(&bx, &by, &params, BaseDistanceKind::Wasserstein2)?;
            json!({
                "value": r.value,
                "value_pow": r.value_pow,
                "eps_grid": r.eps_grid,
                "pgospa_pow": metric.powf(params.p()),
                "resolution": resolution,
            })
        }
        OracleCommand::Qospa { x, y } => {
            let ((rx, lx), (ry, ly)) = (dirac(&x)?, dirac(&y)?);
            json!({"qospa_base": qospa_base(&lx, &ly, rx, ry, &params)?})
        }
    };
    print_json(out, &value)
}
