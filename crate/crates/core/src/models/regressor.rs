//! Point-prediction regression forest and the feature-predictability table.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::forest::MaxFeatures;
use super::tree::{Tree, TreeParams, TreeTargets};
use crate::data::{Dataset, SplitSpec, Targets};
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub max_features: MaxFeatures,
    pub seed: u64,
}

impl Default for RegressionForestConfig {
    fn default() -> Self {
        RegressionForestConfig {
            n_trees: 100,
            max_depth: None,
            max_features: MaxFeatures::All,
            seed: 0,
        }
    }
}

/// Bagged variance-reduction trees; predicts the mean of the tree outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct RandomForestRegressor<F> {
    n_features: usize,
    trees: Vec<Tree<F>>,
}

impl<F: Scalar> RandomForestRegressor<F> {
    /// Fits on a row-major `x` with `n_features` columns.
    pub fn fit(x: &[F], n_features: usize, y: &[F], config: &RegressionForestConfig) -> Result<Self> {
        if n_features == 0 || y.is_empty() || x.len() != y.len() * n_features {
            return Err(Error::invalid("regression forest inputs have inconsistent shapes"));
        }
        if config.n_trees == 0 {
            return Err(Error::invalid("forest needs at least one tree"));
        }
        if x.iter().chain(y).any(|v| !v.is_finite()) {
            return Err(Error::invalid("regression forest inputs must be finite"));
        }
        let n = y.len();
        let params = TreeParams {
            max_depth: config.max_depth,
            max_features: config.max_features.resolve(n_features),
        };
        let targets = TreeTargets::Values(y);
        let root = Stream::new(config.seed).fork("regression-forest");
        let trees = (0..config.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut s = root.fork_index(t as u64);
                let boot: Vec<usize> = (0..n).map(|_| s.below(n as u64) as usize).collect();
                Tree::grow(x, n_features, &targets, boot, params, &mut s)
            })
            .collect();
        Ok(RandomForestRegressor { n_features, trees })
    }

    /// Fits on a regression dataset.
    pub fn fit_dataset(train: &Dataset<F>, config: &RegressionForestConfig) -> Result<Self> {
        let y = train.real_targets().ok_or_else(|| Error::TaskMismatch {
            expected: "regression".into(),
            found: train.task().to_string(),
        })?;
        Self::fit(train.features(), train.n_features(), y, config)
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn predict(&self, x: &[F]) -> F {
        let total: F = self.trees.iter().map(|t| t.leaf_value(x)[0]).sum();
        total / F::from_usize(self.trees.len()).unwrap()
    }
}

/// Coefficient of determination `1 - SS_res / SS_tot`.
///
/// A constant `y` gives 1 for a perfect fit and `-inf`-free 0 otherwise.
pub fn r_squared<F: Scalar>(y: &[F], predicted: &[F]) -> F {
    assert_eq!(y.len(), predicted.len(), "length mismatch");
    let n = F::from_usize(y.len().max(1)).unwrap();
    let mean = y.iter().copied().sum::<F>() / n;
    let ss_tot: F = y.iter().map(|&v| (v - mean) * (v - mean)).sum();
    let ss_res: F = y.iter().zip(predicted).map(|(&v, &p)| (v - p) * (v - p)).sum();
    if ss_tot == F::zero() {
        return if ss_res == F::zero() { F::one() } else { F::zero() };
    }
    F::one() - ss_res / ss_tot
}

/// Held-out R² for predicting one column from the others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturePredictability {
    pub feature: String,
    pub r_squared: f64,
}

/// For each feature, fits a regression forest predicting it from the remaining
/// features (plus the target when `include_target` is set) and reports R² on
/// the held-out part of `split`.
///
/// Class targets enter as their 0-based label index.
pub fn feature_predictability<F: Scalar>(
    ds: &Dataset<F>,
    include_target: bool,
    split: SplitSpec,
    config: &RegressionForestConfig,
) -> Result<Vec<FeaturePredictability>> {
    let d = ds.n_features();
    let target_col: Vec<F> = match ds.targets() {
        Targets::Real(v) => v.clone(),
        Targets::Class { labels, .. } => labels.iter().map(|&l| F::from_usize(l).unwrap()).collect(),
    };
    let n_inputs = d - 1 + usize::from(include_target);
    if n_inputs == 0 {
        return Err(Error::invalid(
            "feature predictability needs at least one other column to predict from",
        ));
    }
    let (train, test) = split.indices(ds.n_rows())?;
    let build = |rows: &[usize], j: usize| -> (Vec<F>, Vec<F>) {
        let mut x = Vec::with_capacity(rows.len() * n_inputs);
        let mut y = Vec::with_capacity(rows.len());
        for &r in rows {
            let row = ds.row(r);
            x.extend(row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &v)| v));
            if include_target {
                x.push(target_col[r]);
            }
            y.push(row[j]);
        }
        (x, y)
    };
    (0..d)
        .map(|j| {
            let (xtr, ytr) = build(&train, j);
            let (xte, yte) = build(&test, j);
            let cfg = RegressionForestConfig {
                seed: Stream::new(config.seed).fork_index(j as u64).next_u64(),
                ..config.clone()
            };
            let model = RandomForestRegressor::fit(&xtr, n_inputs, &ytr, &cfg)?;
            let pred: Vec<F> = xte.chunks(n_inputs).map(|r| model.predict(r)).collect();
            Ok(FeaturePredictability {
                feature: ds.feature_names()[j].clone(),
                r_squared: r_squared(&yte, &pred).as_f64(),
            })
        })
        .collect()
}
