//! Probabilistic GOSPA: a metric on multi-Bernoulli densities for evaluating
//! multi-object filters, with reference oracles and evaluation tooling.

pub mod assignment;
pub mod base;
pub mod error;
pub mod generate;
pub mod io;
pub mod linalg;
pub mod metric;
pub mod model;
pub mod montecarlo;
pub mod oracles;
pub mod scalar;
pub mod selfcheck;
pub mod sweep;
pub mod table;

pub use assignment::{Assignment, AssignmentSolver, CostMatrix, ExactSolver};
pub use base::BaseDistanceKind;
pub use error::{Error, Result};
pub use io::{Document, Scenario};
pub use linalg::SquareMatrix;
pub use metric::{
    bernoulli_pgospa, gospa, mbm_pgospa, mbm_pgospa_detailed, pgospa, pgospa_with_solver, Decomposition, MixtureResult,
    PGospaResult,
};
pub use model::{BernoulliComponent, MbDensity, MbMixture, MetricParams, SingleObjectDensity, ValidationOptions};
pub use scalar::Scalar;

pub type MbDensityF64 = MbDensity<f64>;
pub type MbDensityF32 = MbDensity<f32>;
pub type MbMixtureF64 = MbMixture<f64>;
pub type BernoulliF64 = BernoulliComponent<f64>;
pub type SingleObjectDensityF64 = SingleObjectDensity<f64>;
pub type MetricParamsF64 = MetricParams<f64>;
pub type PGospaResultF64 = PGospaResult<f64>;
pub type DecompositionF64 = Decomposition<f64>;
