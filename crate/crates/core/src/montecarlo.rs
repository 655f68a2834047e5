//! Monte Carlo aggregation over a directory of runs.
//!
//! ```text
//! <dir>/truth/t0000.json          ground truth per time step (MB or points)
//! <dir>/runs/<run>/t0000.json     estimate per run and step (MB or mixture)
//! <dir>/runs/<run>/points/...     optional point estimates, same file names
//! ```
//!
//! Every run must provide exactly the time-step files found under `truth/`.
//! Runs are visited in name order.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::base::BaseDistanceKind;
use crate::error::{Error, Result};
use crate::io::{Document, RawComponent, RawDensity, RawMb, RawMixture, RawMixtureEntry, RawPoints};
use crate::metric::{mbm_pgospa_detailed, pgospa, pth_root, Decomposition};
use crate::model::{MbDensity, MetricParams, ValidationOptions};
use crate::table;

/// Which estimate files a run contributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EstimateSource {
    /// `runs/<run>/tNNNN.json`
    #[default]
    Densities,
    /// `runs/<run>/points/tNNNN.json`
    Points,
}

/// Per-run, per-step metric values.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSeries {
    pub runs: Vec<String>,
    /// Time-step file names, shared by all runs.
    pub steps: Vec<String>,
    /// `totals[run][step]`
    pub totals: Vec<Vec<f64>>,
    /// Decomposition terms in p-th-power units, present for `alpha = 2`.
    pub terms: Option<Vec<Vec<Decomposition<f64>>>>,
}

fn json_files(dir: &Path) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.ends_with(".json") && entry.path().is_file() {
            names.push(name);
        }
    }
    names.sort();
    Ok(names)
}

fn subdirs(dir: &Path) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if entry.path().is_dir() {
            names.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    names.sort();
    Ok(names)
}

fn run_step(
    path: &Path,
    truth: &MbDensity<f64>,
    params: &MetricParams<f64>,
    base: BaseDistanceKind,
) -> Result<(f64, Option<Decomposition<f64>>)> {
    let opts = ValidationOptions::relaxed();
    match Document::load(path)? {
        Document::Mixture(raw) => {
            let (mix, _) = raw.validate::<f64>(opts)?;
            let res = mbm_pgospa_detailed(&mix, truth, params, base)?;
            Ok((res.total, res.decomposition))
        }
        doc => {
            let est = doc.into_mb::<f64>(opts)?;
            let res = pgospa(&est, truth, params, base)?;
            Ok((res.total, res.decomposition))
        }
    }
}

/// Evaluates every run against the truth at every step. Missed terms refer
/// to truth objects and false terms to estimate components.
pub fn load_run_series(
    dir: &Path,
    params: &MetricParams<f64>,
    base: BaseDistanceKind,
    source: EstimateSource,
) -> Result<RunSeries> {
    let truth_dir = dir.join("truth");
    let steps = json_files(&truth_dir)?;
    if steps.is_empty() {
        return Err(Error::RunLayout(format!("no time-step files in {}", truth_dir.display())));
    }
    let truths = steps
        .iter()
        .map(|s| Document::load(truth_dir.join(s))?.into_mb::<f64>(ValidationOptions::relaxed()))
        .collect::<Result<Vec<_>>>()?;
    let runs_dir = dir.join("runs");
    let runs = subdirs(&runs_dir)?;
    if runs.is_empty() {
        return Err(Error::RunLayout(format!("no run directories in {}", runs_dir.display())));
    }
    let run_dir = |run: &str| -> PathBuf {
        let d = runs_dir.join(run);
        match source {
            EstimateSource::Densities => d,
            EstimateSource::Points => d.join("points"),
        }
    };
    for run in &runs {
        let files = json_files(&run_dir(run))?;
        if files != steps {
            return Err(Error::RunLayout(format!(
                "run {run} has {} step files that do not match the {} truth files",
                files.len(),
                steps.len()
            )));
        }
    }

    let per_run: Vec<Vec<(f64, Option<Decomposition<f64>>)>> = runs
        .par_iter()
        .map(|run| {
            let d = run_dir(run);
            steps.iter().zip(&truths).map(|(s, truth)| run_step(&d.join(s), truth, params, base)).collect()
        })
        .collect::<Result<_>>()?;

    let totals = per_run.iter().map(|r| r.iter().map(|x| x.0).collect()).collect();
    let terms = params.decomposable().then(|| {
        per_run
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| {
                        // estimates are evaluated as the first argument
                        let d = x.1.expect("alpha = 2 decomposes");
                        Decomposition { missed: d.false_detection, false_detection: d.missed, ..d }
                    })
                    .collect()
            })
            .collect()
    });
    Ok(RunSeries { runs, steps, totals, terms })
}

/// `(mean of v^p)^(1/p)`. Values are summed in sorted order, so the result
/// does not depend on the order of the runs.
pub fn rms(values: &[f64], p: f64) -> f64 {
    rms_of_powers(&values.iter().map(|v| v.powf(p)).collect::<Vec<_>>(), p)
}

fn rms_of_powers(powers: &[f64], p: f64) -> f64 {
    if powers.is_empty() {
        return 0.0;
    }
    let mut sorted = powers.to_vec();
    sorted.sort_by(f64::total_cmp);
    pth_root(sorted.iter().sum::<f64>() / sorted.len() as f64, p)
}

/// Aggregated values at one time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmsRow {
    pub t: usize,
    pub total: f64,
    /// Each term averaged in p-th-power units over runs, then rooted.
    pub terms: Option<[f64; 4]>,
}

pub fn aggregate(series: &RunSeries, p: f64) -> Vec<RmsRow> {
    (0..series.steps.len())
        .map(|t| {
            let totals: Vec<f64> = series.totals.iter().map(|r| r[t]).collect();
            let terms = series.terms.as_ref().map(|terms| {
                let col = |f: fn(&Decomposition<f64>) -> f64| {
                    rms_of_powers(&terms.iter().map(|r| f(&r[t])).collect::<Vec<_>>(), p)
                };
                [
                    col(|d| d.localization),
                    col(|d| d.existence_mismatch),
                    col(|d| d.missed),
                    col(|d| d.false_detection),
                ]
            });
            RmsRow { t, total: rms(&totals, p), terms }
        })
        .collect()
}

pub fn rms_csv(rows: &[RmsRow]) -> String {
    let with_terms = rows.first().is_some_and(|r| r.terms.is_some());
    if with_terms {
        table::render(
            &[
                "t",
                "rms_total",
                "localization_root_mean_pow",
                "existence_mismatch_root_mean_pow",
                "missed_root_mean_pow",
                "false_root_mean_pow",
            ],
            rows.iter().map(|r| {
                let [a, b, c, d] = r.terms.unwrap_or_default();
                vec![r.t as f64, r.total, a, b, c, d]
            }),
        )
    } else {
        table::render(&["t", "rms_total"], rows.iter().map(|r| vec![r.t as f64, r.total]))
    }
}

/// Settings for [`synth_runs`].
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub runs: usize,
    pub steps: usize,
    pub objects: usize,
    pub seed: u64,
    /// When set, also writes point estimates: means of the components with
    /// existence above the threshold in the highest-weight MB.
    pub estimator_threshold: Option<f64>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { runs: 10, steps: 20, objects: 4, seed: 0, estimator_threshold: None }
    }
}

struct Track {
    birth: usize,
    death: usize,
    start: [f64; 2],
    velocity: [f64; 2],
}

impl Track {
    fn at(&self, t: usize) -> Option<Vec<f64>> {
        let k = t.checked_sub(self.birth).filter(|_| t < self.death)? as f64;
        Some(vec![self.start[0] + k * self.velocity[0], self.start[1] + k * self.velocity[1]])
    }
}

fn gaussian_component(r: f64, mean: Vec<f64>, var: f64) -> RawComponent {
    RawComponent { r, density: RawDensity::Gaussian { mean, cov: vec![vec![var, 0.0], vec![0.0, var]] } }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string(value)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Writes a synthetic run directory: 2D objects on straight tracks, and per
/// run a two-entry MB mixture per step with noisy, occasionally missing and
/// spurious components. The output depends only on `cfg`.
pub fn synth_runs(dir: &Path, cfg: &SynthConfig) -> Result<()> {
    if cfg.runs == 0 || cfg.steps == 0 {
        return Err(Error::InvalidParams("need at least one run and one step".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let tracks: Vec<Track> = (0..cfg.objects)
        .map(|_| {
            let birth = rng.random_range(0..cfg.steps.div_ceil(2));
            let death = rng.random_range(birth + 1..=cfg.steps);
            Track {
                birth,
                death,
                start: [rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0)],
                velocity: [unit.sample(&mut rng), unit.sample(&mut rng)],
            }
        })
        .collect();
    let step_name = |t: usize| format!("t{t:04}.json");

    let truth_dir = dir.join("truth");
    fs::create_dir_all(&truth_dir).map_err(|e| Error::io(&truth_dir, e))?;
    for t in 0..cfg.steps {
        let points = RawPoints { points: tracks.iter().filter_map(|tr| tr.at(t)).collect() };
        write_json(&truth_dir.join(step_name(t)), &points)?;
    }

    for run in 0..cfg.runs {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(run as u64 + 1);
        let run_dir = dir.join("runs").join(format!("run{run:03}"));
        fs::create_dir_all(&run_dir).map_err(|e| Error::io(&run_dir, e))?;
        let points_dir = run_dir.join("points");
        if cfg.estimator_threshold.is_some() {
            fs::create_dir_all(&points_dir).map_err(|e| Error::io(&points_dir, e))?;
        }
        for t in 0..cfg.steps {
            let mut main = Vec::new();
            for pos in tracks.iter().filter_map(|tr| tr.at(t)) {
                if rng.random_bool(0.95) {
                    let mean = pos.iter().map(|x| x + unit.sample(&mut rng)).collect();
                    main.push(gaussian_component(rng.random_range(0.6..1.0), mean, rng.random_range(0.5..2.0)));
                }
            }
            if rng.random_bool(0.3) {
                let mean = vec![rng.random_range(-60.0..60.0), rng.random_range(-60.0..60.0)];
                main.push(gaussian_component(rng.random_range(0.05..0.5), mean, rng.random_range(0.5..2.0)));
            }
            let alt = main
                .iter()
                .map(|c| {
                    let RawDensity::Gaussian { mean, cov } = &c.density else { unreachable!() };
                    let mean = mean.iter().map(|x| x + 0.5 * unit.sample(&mut rng)).collect();
                    gaussian_component(c.r * rng.random_range(0.5..1.0), mean, cov[0][0])
                })
                .collect();
            let entries = [(0.7, main), (0.3, alt)];
            if let Some(threshold) = cfg.estimator_threshold {
                let (_, best) = &entries[0];
                let points = best
                    .iter()
                    .filter(|c| c.r > threshold)
                    .map(|c| match &c.density {
                        RawDensity::Gaussian { mean, .. } => mean.clone(),
                        RawDensity::Dirac { location } => location.clone(),
                    })
                    .collect();
                write_json(&points_dir.join(step_name(t)), &RawPoints { points })?;
            }
            let mixture = RawMixture {
                mixture: entries
                    .into_iter()
                    .map(|(weight, components)| RawMixtureEntry { weight, mb: RawMb { components } })
                    .collect(),
            };
            write_json(&run_dir.join(step_name(t)), &mixture)?;
        }
    }
    Ok(())
}

/// Convenience: loads, aggregates and renders in one call.
pub fn montecarlo_csv(
    dir: &Path,
    params: &MetricParams<f64>,
    base: BaseDistanceKind,
    source: EstimateSource,
) -> Result<String> {
    let series = load_run_series(dir, params, base, source)?;
    Ok(rms_csv(&aggregate(&series, params.p())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rms_hand_values() {
        assert!((rms(&[3.0, 4.0], 2.0) - 12.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(rms(&[2.0, 2.0, 2.0], 2.0), 2.0);
        assert_eq!(rms(&[0.0, 0.0], 1.0), 0.0);
        assert_eq!(rms(&[1.0, 3.0], 1.0), 2.0);
        assert_eq!(rms(&[], 2.0), 0.0);
    }

    #[test]
    fn rms_ignores_run_order() {
        let v = [0.1, 7.3, 2.2, 1e-3, 5.5, 0.7];
        let mut w = v;
        w.reverse();
        assert_eq!(rms(&v, 2.0), rms(&w, 2.0));
    }

    #[test]
    fn synthetic_directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SynthConfig { runs: 3, steps: 4, objects: 2, seed: 7, estimator_threshold: Some(0.4) };
        synth_runs(dir.path(), &cfg).unwrap();
        let params = MetricParams::new(10.0, 2.0, 2.0).unwrap();
        let a = montecarlo_csv(dir.path(), &params, BaseDistanceKind::Wasserstein2, EstimateSource::Densities).unwrap();
        let b = montecarlo_csv(dir.path(), &params, BaseDistanceKind::Wasserstein2, EstimateSource::Densities).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.lines().count(), 5);
        let pts = montecarlo_csv(dir.path(), &params, BaseDistanceKind::Wasserstein2, EstimateSource::Points).unwrap();
        assert!(pts.starts_with("t,rms_total,localization_root_mean_pow,"));
    }

    #[test]
    fn misaligned_runs_rejected() {
        let dir = tempfile::tempdir().unwrap();
        synth_runs(dir.path(), &SynthConfig { runs: 2, steps: 3, ..Default::default() }).unwrap();
        fs::remove_file(dir.path().join("runs/run001/t0002.json")).unwrap();
        let params = MetricParams::new(10.0, 2.0, 2.0).unwrap();
        let err = load_run_series(dir.path(), &params, BaseDistanceKind::Wasserstein2, EstimateSource::Densities);
        assert!(matches!(err, Err(Error::RunLayout(_))));
    }
}
