//! Model-agnostic variable importance for uncertainty-aware predictors.
//!
//! The crate computes permutation feature importance on three statistics of a
//! model's predictive distribution (classic loss, negative log-likelihood and
//! entropy), partial-dependence and ICE curves for the same statistics, and
//! ships two reference probabilistic models (an exact Gaussian process and a
//! sigmoid-calibrated random forest) plus seeded synthetic data generators.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below name the `f64` instantiations used by the command-line tool.

pub mod curves;
pub mod data;
pub mod distributions;
pub mod error;
pub mod importance;
pub mod linalg;
pub mod models;
pub mod rng;
pub mod scalar;
pub mod synthetic;

pub use curves::{compute_curves, CurveOptions, CurveSet, GridSpec, Metric};
pub use data::{Dataset, SplitSpec, Standardizer, Targets};
pub use distributions::{Categorical, Gaussian, PredictiveDistribution, Target, TaskKind};
pub use error::{Error, Result};
pub use importance::{
    pfi_all_features, ImportanceEntry, ImportanceReport, Measure, PermutationPlan, PfiOptions,
};
pub use models::{
    AnyModel, CalibratedForest, ForestConfig, GpConfig, GpModel, ModelFile, ProbabilisticModel,
    RandomForestRegressor,
};
pub use scalar::Scalar;

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type PredictiveDistribution64 = PredictiveDistribution<f64>;
pub type PredictiveDistribution32 = PredictiveDistribution<f32>;
pub type GpModel64 = GpModel<f64>;
pub type GpModel32 = GpModel<f32>;
pub type CalibratedForest64 = CalibratedForest<f64>;
pub type CalibratedForest32 = CalibratedForest<f32>;
pub type AnyModel64 = AnyModel<f64>;
pub type ImportanceReport64 = ImportanceReport<f64>;
pub type ImportanceReport32 = ImportanceReport<f32>;
pub type CurveSet64 = CurveSet<f64>;
pub type CurveSet32 = CurveSet<f32>;
