//! Parameter sweeps: the single-Bernoulli heatmap over `(r, σ²)` and the
//! cut-off sweep over `c` with the error decomposition.

use std::fmt;
use std::str::FromStr;

use crate::base::BaseDistanceKind;
use crate::error::{Error, Result};
use crate::io::Scenario;
use crate::metric::{pgospa, Decomposition};
use crate::model::{BernoulliComponent, MbDensity, MetricParams, SingleObjectDensity, ValidationOptions};
use crate::table;

/// The swept quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    R,
    Sigma2,
    C,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            Self::R => "r",
            Self::Sigma2 => "sigma2",
            Self::C => "c",
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r" => Ok(Self::R),
            "sigma2" => Ok(Self::Sigma2),
            "c" => Ok(Self::C),
            other => Err(Error::InvalidSweep(format!("unknown sweep variable {other:?}"))),
        }
    }
}

/// An arithmetic grid `start, start + step, ..., <= stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    variable: SweepVariable,
    start: f64,
    stop: f64,
    step: f64,
}

impl SweepSpec {
    pub fn new(variable: SweepVariable, start: f64, stop: f64, step: f64) -> Result<Self> {
        if ![start, stop, step].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidSweep("bounds and step must be finite".into()));
        }
        if step <= 0.0 {
            return Err(Error::InvalidSweep(format!("step must be positive, got {step}")));
        }
        if start > stop {
            return Err(Error::InvalidSweep(format!("start {start} exceeds stop {stop}")));
        }
        Ok(Self { variable, start, stop, step })
    }

    pub fn variable(&self) -> SweepVariable {
        self.variable
    }

    /// Grid points computed as `start + k * step` so that no error
    /// accumulates; the last point may overshoot `stop` by rounding only.
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start + k as f64 * self.step).collect()
    }
}

/// Existence probabilities `0, 0.01, ..., 1`.
pub fn example1_r_grid() -> Vec<f64> {
    (0..=100).map(|k| k as f64 / 100.0).collect()
}

/// Variances `0, 0.1, ..., 30`.
pub fn example1_sigma2_grid() -> Vec<f64> {
    (0..=300).map(|k| k as f64 / 10.0).collect()
}

/// Cut-offs `0.1, 0.2, ..., 10`.
pub fn example2_c_grid() -> Vec<f64> {
    (1..=100).map(|k| k as f64 / 10.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example1Row {
    pub r: f64,
    pub sigma2: f64,
    pub value: f64,
}

/// Truth: one object at 0 that surely exists. Estimate: a Bernoulli with
/// existence `r` and density `N(2, σ²)`. Metric with `c = 5`, `p = 1`,
/// `alpha = 2`, W2 base.
pub fn example1(r_grid: &[f64], sigma2_grid: &[f64]) -> Result<Vec<Example1Row>> {
    let params = MetricParams::new(5.0, 1.0, 2.0)?;
    let truth = MbDensity::from_points(&[vec![0.0]])?;
    let mut rows = Vec::with_capacity(r_grid.len() * sigma2_grid.len());
    for &r in r_grid {
        for &sigma2 in sigma2_grid {
            let density = SingleObjectDensity::gaussian_1d(2.0, sigma2)?;
            let est = MbDensity::new(vec![BernoulliComponent::with_options(r, density, ValidationOptions::relaxed())?])?;
            let value = pgospa(&truth, &est, &params, BaseDistanceKind::Wasserstein2)?.total;
            rows.push(Example1Row { r, sigma2, value });
        }
    }
    Ok(rows)
}

pub fn example1_csv(rows: &[Example1Row]) -> String {
    table::render(&["r", "sigma2", "pgospa"], rows.iter().map(|row| vec![row.r, row.sigma2, row.value]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutoffRow {
    pub c: f64,
    pub total: f64,
    /// Terms in p-th-power units; they sum to `total^p`.
    pub decomposition: Decomposition<f64>,
}

/// Metric and decomposition at every cut-off in `c_grid` (requires `alpha = 2`).
pub fn cutoff_sweep(
    x: &MbDensity<f64>,
    y: &MbDensity<f64>,
    c_grid: &[f64],
    p: f64,
    base: BaseDistanceKind,
) -> Result<Vec<CutoffRow>> {
    c_grid
        .iter()
        .map(|&c| {
            let params = MetricParams::new(c, p, 2.0)?;
            let res = pgospa(x, y, &params, base)?;
            let decomposition = res.decomposition.expect("alpha = 2 decomposes");
            Ok(CutoffRow { c, total: res.total, decomposition })
        })
        .collect()
}

pub fn cutoff_csv(rows: &[CutoffRow]) -> String {
    table::render(
        &["c", "total", "localization", "existence_mismatch", "missed", "false"],
        rows.iter().map(|row| {
            let d = &row.decomposition;
            vec![row.c, row.total, d.localization, d.existence_mismatch, d.missed, d.false_detection]
        }),
    )
}

/// The bundled two-MB scenario with three 2D Gaussian components on each
/// side, for which components pair up one by one as `c` grows.
pub fn example2_scenario() -> Scenario {
    serde_json::from_str(include_str!("../scenarios/example2.json")).expect("bundled scenario parses")
}
