//! The probabilistic-model contract and the built-in reference models.

pub mod forest;
pub mod gp;
pub mod persist;
pub mod platt;
pub mod regressor;
mod tree;

pub use forest::{CalibratedForest, ForestConfig, MaxFeatures};
pub use gp::{GpConfig, GpFitReport, GpHyperparameters, GpModel};
pub use persist::{AnyModel, ModelFile, MODEL_FORMAT_VERSION};
pub use platt::{fit_sigmoid_calibration, SigmoidParams};
pub use regressor::{
    feature_predictability, r_squared, FeaturePredictability, RandomForestRegressor,
    RegressionForestConfig,
};

use crate::distributions::{PredictiveDistribution, TaskKind};
use crate::scalar::Scalar;

/// Anything that maps a feature vector to a predictive distribution `q(Y | x)`.
///
/// Implementations must be deterministic at prediction time and total on all
/// finite inputs; importance estimators call `predict_dist` concurrently.
pub trait ProbabilisticModel<F: Scalar>: Send + Sync {
    fn task(&self) -> TaskKind;

    fn n_features(&self) -> usize;

    fn predict_dist(&self, x: &[F]) -> PredictiveDistribution<F>;
}

impl<F: Scalar, M: ProbabilisticModel<F> + ?Sized> ProbabilisticModel<F> for &M {
    fn task(&self) -> TaskKind {
        (**self).task()
    }
    fn n_features(&self) -> usize {
        (**self).n_features()
    }
    fn predict_dist(&self, x: &[F]) -> PredictiveDistribution<F> {
        (**self).predict_dist(x)
    }
}

impl<F: Scalar, M: ProbabilisticModel<F> + ?Sized> ProbabilisticModel<F> for Box<M> {
    fn task(&self) -> TaskKind {
        (**self).task()
    }
    fn n_features(&self) -> usize {
        (**self).n_features()
    }
    fn predict_dist(&self, x: &[F]) -> PredictiveDistribution<F> {
        (**self).predict_dist(x)
    }
}

/// Wraps a closure as a model; handy for analytic models and external adapters.
pub struct FnModel<P> {
    task: TaskKind,
    n_features: usize,
    predict: P,
}

impl<P> FnModel<P> {
    pub fn new(task: TaskKind, n_features: usize, predict: P) -> Self {
        FnModel {
            task,
            n_features,
            predict,
        }
    }
}

impl<F, P> ProbabilisticModel<F> for FnModel<P>
where
    F: Scalar,
    P: Fn(&[F]) -> PredictiveDistribution<F> + Send + Sync,
{
    fn task(&self) -> TaskKind {
        self.task
    }
    fn n_features(&self) -> usize {
        self.n_features
    }
    fn predict_dist(&self, x: &[F]) -> PredictiveDistribution<F> {
        (self.predict)(x)
    }
}
