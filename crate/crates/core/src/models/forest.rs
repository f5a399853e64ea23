//! Random-forest classifier with per-class sigmoid calibration.
//!
//! Trees are grown on bootstrap resamples of 80% of the training rows; the
//! remaining 20% provide held-out scores for one-vs-rest Platt scaling. The
//! calibrated probabilities are clamped away from zero and renormalized.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::platt::{fit_sigmoid_calibration, fit_sigmoid_intercept, SigmoidParams};
use super::tree::{Tree, TreeParams, TreeTargets};
use super::ProbabilisticModel;
use crate::data::Dataset;
use crate::distributions::{Categorical, PredictiveDistribution, TaskKind, NLL_PROB_FLOOR};
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::scalar::Scalar;

/// Internal splits tried before giving up on finding every class in both parts.
pub const MAX_SPLIT_ATTEMPTS: usize = 10;

/// How many candidate features each split examines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// `max(1, floor(sqrt(d)))`.
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => ((d as f64).sqrt().floor() as usize).max(1),
            MaxFeatures::All => d,
            MaxFeatures::Count(c) => c.clamp(1, d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    /// Share of training rows held out for calibration.
    pub calibration_fraction: f64,
    pub max_features: MaxFeatures,
    pub seed: u64,
    /// When false, trees use every training row and outputs are raw leaf frequencies.
    pub calibrate: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 500,
            max_depth: Some(8),
            calibration_fraction: 0.2,
            max_features: MaxFeatures::Sqrt,
            seed: 0,
            calibrate: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct CalibratedForest<F> {
    n_features: usize,
    n_classes: usize,
    trees: Vec<Tree<F>>,
    /// One sigmoid per class; `None` when calibration is disabled.
    calibration: Option<Vec<SigmoidParams<F>>>,
    config: ForestConfig,
    /// Internal split attempt that succeeded (0-based).
    split_attempt: usize,
}

fn class_counts(labels: &[usize], rows: &[usize], k: usize) -> Vec<usize> {
    let mut c = vec![0usize; k];
    for &r in rows {
        c[labels[r]] += 1;
    }
    c
}

impl<F: Scalar> CalibratedForest<F> {
    pub fn fit(train: &Dataset<F>, config: &ForestConfig) -> Result<Self> {
        let task = train.task();
        let (labels, k) = match (train.class_labels(), task) {
            (Some(l), TaskKind::Classification { n_classes }) => (l, n_classes),
            _ => {
                return Err(Error::TaskMismatch {
                    expected: "classification".into(),
                    found: task.to_string(),
                })
            }
        };
        if config.n_trees == 0 {
            return Err(Error::invalid("forest needs at least one tree"));
        }
        if config.max_depth == Some(0) {
            return Err(Error::invalid("max_depth must be at least 1"));
        }
        let n = train.n_rows();
        let all: Vec<usize> = (0..n).collect();
        let counts = class_counts(labels, &all, k);
        if let Some(c) = counts.iter().position(|&c| c == 0) {
            return Err(Error::invalid(format!(
                "class {c} is absent from the training data"
            )));
        }
        let root = Stream::new(config.seed).fork("forest");
        if !config.calibrate {
            let trees = grow_trees(train, labels, k, &all, config, &root.fork_index(0));
            return Ok(CalibratedForest {
                n_features: train.n_features(),
                n_classes: k,
                trees,
                calibration: None,
                config: config.clone(),
                split_attempt: 0,
            });
        }
        let f = config.calibration_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::invalid(format!(
                "calibration fraction must lie in (0, 1), got {f}"
            )));
        }
        let n_cal = (f * n as f64).round() as usize;
        for attempt in 0..MAX_SPLIT_ATTEMPTS {
            let stream = root.fork_index(attempt as u64);
            let mut perm = stream.fork("split").permutation(n);
            let fit_rows = perm.split_off(n_cal);
            let cal_rows = perm;
            let complete = |rows: &[usize]| class_counts(labels, rows, k).iter().all(|&c| c > 0);
            if !complete(&fit_rows) || !complete(&cal_rows) {
                continue;
            }
            let trees = grow_trees(train, labels, k, &fit_rows, config, &stream);
            let mut forest = CalibratedForest {
                n_features: train.n_features(),
                n_classes: k,
                trees,
                calibration: None,
                config: config.clone(),
                split_attempt: attempt,
            };
            let scores: Vec<Vec<F>> = cal_rows
                .par_iter()
                .map(|&r| forest.raw_scores(train.row(r)))
                .collect();
            let mut params = Vec::with_capacity(k);
            for c in 0..k {
                let s: Vec<F> = scores.iter().map(|v| v[c]).collect();
                let y: Vec<bool> = cal_rows.iter().map(|&r| labels[r] == c).collect();
                let mut p = fit_sigmoid_calibration(&s, &y)?;
                // keep the map increasing in the raw score
                if p.a > F::zero() {
                    p = fit_sigmoid_intercept(&s, &y)?;
                }
                params.push(p);
            }
            forest.calibration = Some(params);
            return Ok(forest);
        }
        Err(Error::Fit(format!(
            "no internal split in {MAX_SPLIT_ATTEMPTS} attempts kept every class in both parts"
        )))
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn calibration(&self) -> Option<&[SigmoidParams<F>]> {
        self.calibration.as_deref()
    }

    pub fn split_attempt(&self) -> usize {
        self.split_attempt
    }

    /// Deepest tree in the forest.
    pub fn max_tree_depth(&self) -> usize {
        self.trees.iter().map(|t| t.depth()).max().unwrap_or(0)
    }

    /// Mean leaf class frequencies over all trees.
    pub fn raw_scores(&self, x: &[F]) -> Vec<F> {
        let mut acc = vec![F::zero(); self.n_classes];
        for t in &self.trees {
            for (a, &v) in acc.iter_mut().zip(t.leaf_value(x)) {
                *a += v;
            }
        }
        let n = F::from_usize(self.trees.len()).unwrap();
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }

    /// Calibrated class probabilities (raw frequencies if uncalibrated).
    pub fn predict_proba(&self, x: &[F]) -> Vec<F> {
        let raw = self.raw_scores(x);
        let Some(cal) = &self.calibration else {
            return raw;
        };
        let floor = F::lit(NLL_PROB_FLOOR);
        let mut p: Vec<F> = raw
            .iter()
            .zip(cal)
            .map(|(&s, c)| c.apply(s).max(floor))
            .collect();
        let total: F = p.iter().copied().sum();
        p.iter_mut().for_each(|v| *v /= total);
        p
    }
}

fn grow_trees<F: Scalar>(
    train: &Dataset<F>,
    labels: &[usize],
    k: usize,
    rows: &[usize],
    config: &ForestConfig,
    stream: &Stream,
) -> Vec<Tree<F>> {
    let params = TreeParams {
        max_depth: config.max_depth,
        max_features: config.max_features.resolve(train.n_features()),
    };
    let targets = TreeTargets::Classes { labels, n_classes: k };
    let trees_stream = stream.fork("trees");
    (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut s = trees_stream.fork_index(t as u64);
            let boot: Vec<usize> = (0..rows.len())
                .map(|_| rows[s.below(rows.len() as u64) as usize])
                .collect();
            Tree::grow(train.features(), train.n_features(), &targets, boot, params, &mut s)
        })
        .collect()
}

impl<F: Scalar> ProbabilisticModel<F> for CalibratedForest<F> {
    fn task(&self) -> TaskKind {
        TaskKind::Classification {
            n_classes: self.n_classes,
        }
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_dist(&self, x: &[F]) -> PredictiveDistribution<F> {
        let p = self.predict_proba(x);
        let cat = Categorical::new(p.clone())
            .or_else(|_| Categorical::from_weights(p))
            .expect("forest probabilities are non-negative with positive mass");
        PredictiveDistribution::Categorical(cat)
    }
}
