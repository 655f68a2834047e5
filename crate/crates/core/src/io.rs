//! JSON document schemas.
//!
//! ```json
//! {"components":[{"r":0.7,"density":{"type":"gaussian","mean":[2.0],"cov":[[1.0]]}}]}
//! {"components":[{"r":1.0,"density":{"type":"dirac","location":[0.0]}}]}
//! {"mixture":[{"weight":0.4,"mb":{"components":[]}}]}
//! {"points":[[0.0,1.0],[2.0,3.0]]}
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::base::BaseDistanceKind;
use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::metric::PGospaResult;
use crate::model::{build_mb, MbDensity, MbMixture, MetricParams, SingleObjectDensity, ValidationOptions};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum RawDensity {
    Gaussian { mean: Vec<f64>, cov: Vec<Vec<f64>> },
    Dirac { location: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawComponent {
    pub r: f64,
    pub density: RawDensity,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMb {
    pub components: Vec<RawComponent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMixtureEntry {
    pub weight: f64,
    pub mb: RawMb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMixture {
    pub mixture: Vec<RawMixtureEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPoints {
    pub points: Vec<Vec<f64>>,
}

/// Two-MB scenario used by the cut-off sweep. Metric fields are optional and
/// only fill in what the command line leaves unset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub x: RawMb,
    pub y: RawMb,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<BaseDistanceKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl RawDensity {
    pub fn to_density<T: Scalar>(&self, index: usize) -> Result<SingleObjectDensity<T>> {
        match self {
            Self::Gaussian { mean, cov } => {
                let rows: Vec<Vec<T>> =
                    cov.iter().map(|row| row.iter().map(|&x| T::lit(x)).collect()).collect();
                let cov = SquareMatrix::from_rows(&rows).ok_or_else(|| {
                    Error::MalformedDensity(format!("covariance of component {index} is not square"))
                })?;
                SingleObjectDensity::gaussian_at(index, mean.iter().map(|&x| T::lit(x)).collect(), cov)
            }
            Self::Dirac { location } => {
                SingleObjectDensity::dirac(location.iter().map(|&x| T::lit(x)).collect())
            }
        }
    }

    pub fn from_density<T: Scalar>(d: &SingleObjectDensity<T>) -> Self {
        match d {
            SingleObjectDensity::Gaussian { mean, cov } => Self::Gaussian {
                mean: mean.iter().map(|x| x.as_f64()).collect(),
                cov: cov.to_rows().iter().map(|r| r.iter().map(|x| x.as_f64()).collect()).collect(),
            },
            SingleObjectDensity::Dirac { location } => {
                Self::Dirac { location: location.iter().map(|x| x.as_f64()).collect() }
            }
        }
    }
}

impl RawMb {
    /// Validates into a typed MB (symmetrizes and clamps covariances).
    pub fn validate<T: Scalar>(&self, opts: ValidationOptions) -> Result<MbDensity<T>> {
        let parts = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| Ok((T::lit(c.r), c.density.to_density(i)?)))
            .collect::<Result<Vec<_>>>()?;
        build_mb(parts, opts)
    }

    pub fn from_mb<T: Scalar>(mb: &MbDensity<T>) -> Self {
        Self {
            components: mb
                .components()
                .iter()
                .map(|c| RawComponent { r: c.r().as_f64(), density: RawDensity::from_density(c.density()) })
                .collect(),
        }
    }
}

impl RawMixture {
    pub fn validate<T: Scalar>(&self, opts: ValidationOptions) -> Result<(MbMixture<T>, Option<String>)> {
        let entries = self
            .mixture
            .iter()
            .map(|e| Ok((T::lit(e.weight), e.mb.validate(opts)?)))
            .collect::<Result<Vec<_>>>()?;
        MbMixture::new(entries)
    }
}

impl RawPoints {
    pub fn to_points<T: Scalar>(&self) -> Result<Vec<Vec<T>>> {
        if let Some(first) = self.points.first() {
            for p in &self.points {
                if p.len() != first.len() {
                    return Err(Error::DimensionMismatch { expected: first.len(), found: p.len() });
                }
            }
        }
        if self.points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("point coordinates".into()));
        }
        Ok(self.points.iter().map(|p| p.iter().map(|&x| T::lit(x)).collect()).collect())
    }
}

/// Any of the three input document kinds.
#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Mb(RawMb),
    Mixture(RawMixture),
    Points(RawPoints),
}

impl Document {
    /// Parses text, dispatching on the top-level key. Syntax and schema
    /// errors carry serde's line/column position.
    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let has = |k: &str| value.get(k).is_some();
        if has("components") {
            Ok(Self::Mb(serde_json::from_str(text)?))
        } else if has("mixture") {
            Ok(Self::Mixture(serde_json::from_str(text)?))
        } else if has("points") {
            Ok(Self::Points(serde_json::from_str(text)?))
        } else {
            Err(Error::UnknownDocument { expected: "\"components\", \"mixture\" or \"points\"" })
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&read(path)?)
    }

    /// Interprets the document as a single MB. Point sets become `r = 1`
    /// Dirac components.
    pub fn into_mb<T: Scalar>(self, opts: ValidationOptions) -> Result<MbDensity<T>> {
        match self {
            Self::Mb(raw) => raw.validate(opts),
            Self::Points(pts) => MbDensity::from_points(&pts.to_points()?),
            Self::Mixture(_) => Err(Error::UnknownDocument { expected: "an MB or point set, not a mixture" }),
        }
    }
}

pub(crate) fn read(path: impl AsRef<Path>) -> Result<String> {
    std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path, e))
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    Ok(serde_json::from_str(&read(path)?)?)
}

/// Compact JSON of an MB.
pub fn mb_to_json<T: Scalar>(mb: &MbDensity<T>) -> String {
    serde_json::to_string(&RawMb::from_mb(mb)).expect("MB serializes")
}

/// Result document: value, exponent, decomposition (or `null`), assignment
/// pairs, and the settings it was computed with.
pub fn result_json(
    res: &PGospaResult<f64>,
    params: &MetricParams<f64>,
    base: BaseDistanceKind,
) -> serde_json::Value {
    let decomposition = match &res.decomposition {
        Some(d) => json!({
            "localization": d.localization,
            "existence_mismatch": d.existence_mismatch,
            "missed": d.missed,
            "false": d.false_detection,
        }),
        None => serde_json::Value::Null,
    };
    json!({
        "total": res.total,
        "p": res.p,
        "decomposition": decomposition,
        "matched_pairs": res.matched_pairs,
        "base": base.name(),
        "c": params.c(),
        "alpha": params.alpha(),
        "near_tie": res.near_tie,
        "tie_breaking": "lexicographically smallest optimal assignment",
    })
}
