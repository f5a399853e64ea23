//! Partial-dependence (PDP) and individual conditional expectation (ICE)
//! curves for the predictive mean, the predictive entropy and the negative
//! log-likelihood.
//!
//! `ice[i][t]` is the metric of `q(. | x_-j = x_-j(i), x_j = grid[t])` and the
//! PDP is the plain mean of the ICE values over the full test set. For the
//! likelihood metric that is the mean of per-example NLL values, not the NLL
//! of an averaged distribution.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::distributions::{PredictiveDistribution, Target, TaskKind};
use crate::error::{Error, Result};
use crate::models::ProbabilisticModel;
use crate::rng::Stream;
use crate::scalar::Scalar;

pub const DEFAULT_GRID_POINTS: usize = 50;

/// Evaluation grid for the swept feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum GridSpec {
    /// Evenly spaced points; missing bounds default to the test-set range.
    Linear {
        min: Option<f64>,
        max: Option<f64>,
        points: usize,
    },
    /// Empirical quantiles of the test column at evenly spaced probabilities;
    /// repeated values are dropped.
    Quantile { points: usize },
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Linear {
            min: None,
            max: None,
            points: DEFAULT_GRID_POINTS,
        }
    }
}

impl GridSpec {
    /// Builds a strictly increasing grid with at least two points.
    pub fn build<F: Scalar>(&self, column: &[F]) -> Result<Vec<F>> {
        if column.is_empty() {
            return Err(Error::invalid("cannot build a grid from an empty column"));
        }
        let lo_data = column.iter().copied().fold(F::infinity(), F::min);
        let hi_data = column.iter().copied().fold(F::neg_infinity(), F::max);
        let grid = match *self {
            GridSpec::Linear { min, max, points } => {
                if points < 2 {
                    return Err(Error::invalid("a grid needs at least 2 points"));
                }
                let lo = min.map(F::lit).unwrap_or(lo_data);
                let hi = max.map(F::lit).unwrap_or(hi_data);
                if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                    return Err(Error::invalid(format!(
                        "grid range [{lo}, {hi}] is empty"
                    )));
                }
                let last = F::from_usize(points - 1).unwrap();
                (0..points)
                    .map(|t| {
                        if t == points - 1 {
                            hi
                        } else {
                            lo + (hi - lo) * F::from_usize(t).unwrap() / last
                        }
                    })
                    .collect::<Vec<F>>()
            }
            GridSpec::Quantile { points } => {
                if points < 2 {
                    return Err(Error::invalid("a grid needs at least 2 points"));
                }
                let mut sorted = column.to_vec();
                sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite features"));
                let n = sorted.len();
                let mut g: Vec<F> = (0..points)
                    .map(|t| {
                        // linear interpolation between order statistics
                        let pos = (n - 1) as f64 * t as f64 / (points - 1) as f64;
                        let k = pos.floor() as usize;
                        let frac = F::lit(pos - k as f64);
                        if k + 1 < n {
                            sorted[k] + (sorted[k + 1] - sorted[k]) * frac
                        } else {
                            sorted[n - 1]
                        }
                    })
                    .collect();
                g.dedup();
                if g.len() < 2 {
                    return Err(Error::invalid(
                        "quantile grid collapsed to a single value (constant feature)",
                    ));
                }
                g
            }
        };
        debug_assert!(grid.windows(2).all(|w| w[0] < w[1]));
        Ok(grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Predictive mean (regression) or one class probability (classification).
    Mean,
    Entropy,
    Nll,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Mean, Metric::Entropy, Metric::Nll];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Mean => "mean",
            Metric::Entropy => "entropy",
            Metric::Nll => "nll",
        }
    }

    pub fn units(self, task: TaskKind) -> &'static str {
        match (self, task) {
            (Metric::Mean, TaskKind::Regression) => "target units",
            (Metric::Mean, TaskKind::Classification { .. }) => "probability",
            _ => "nats",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| Error::invalid(format!("unknown metric '{s}' (valid: mean, entropy, nll)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveOptions {
    /// Class traced by the mean metric on classification; `None` picks class 1
    /// (the second class).
    pub class: Option<usize>,
    /// Maximum number of ICE rows kept; `None` keeps all. The PDP always uses every row.
    pub max_curves: Option<usize>,
    /// Seed for choosing retained ICE rows.
    pub seed: u64,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions {
            class: None,
            max_curves: None,
            seed: 0,
        }
    }
}

/// The unmodified example behind one ICE curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct IceOrigin<F> {
    /// Row index in the test set.
    pub row: usize,
    /// Observed value of the swept feature.
    pub feature_value: F,
    /// Metric at the unmodified example.
    pub metric_value: F,
    /// Values of the other features, in dataset order.
    pub complement: Vec<F>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct CurveSet<F> {
    pub feature_index: usize,
    pub feature: String,
    pub metric: Metric,
    /// Class traced by the mean metric on classification.
    pub class: Option<usize>,
    pub units: String,
    pub grid: Vec<F>,
    /// One row per retained example, `grid.len()` values each.
    pub ice: Vec<Vec<F>>,
    /// Mean over every test example, not only the retained ones.
    pub pdp: Vec<F>,
    pub origins: Vec<IceOrigin<F>>,
    pub n_rows: usize,
    pub seed: u64,
}

/// Deterministic subset of `max_curves` row indices (sorted), or all rows.
pub fn subsample_ice(n_rows: usize, max_curves: Option<usize>, seed: u64) -> Vec<usize> {
    match max_curves {
        Some(k) if k < n_rows => Stream::new(seed).fork("ice").sample_indices(n_rows, k),
        _ => (0..n_rows).collect(),
    }
}

fn evaluate<F: Scalar>(q: &PredictiveDistribution<F>, metric: Metric, class: usize, y: Target<F>) -> Result<F> {
    match metric {
        Metric::Mean => Ok(q.mean_or_prob(class)),
        Metric::Entropy => Ok(q.entropy()),
        Metric::Nll => q.nll(y),
    }
}

/// ICE curves for the retained rows and the PDP over all rows, in one pass.
pub fn compute_curves<F: Scalar, M: ProbabilisticModel<F> + ?Sized>(
    model: &M,
    test: &Dataset<F>,
    j: usize,
    grid: &GridSpec,
    metric: Metric,
    opts: &CurveOptions,
) -> Result<CurveSet<F>> {
    test.check_feature(j)?;
    if model.task() != test.task() {
        return Err(Error::TaskMismatch {
            expected: model.task().to_string(),
            found: test.task().to_string(),
        });
    }
    if model.n_features() != test.n_features() {
        return Err(Error::invalid(format!(
            "model expects {} features, test set has {}",
            model.n_features(),
            test.n_features()
        )));
    }
    let class = match test.task() {
        TaskKind::Classification { n_classes } => {
            let c = opts.class.unwrap_or(1);
            if c >= n_classes {
                return Err(Error::invalid(format!(
                    "class {c} out of range for {n_classes} classes"
                )));
            }
            Some(c)
        }
        TaskKind::Regression => None,
    };
    let grid = grid.build(&test.column(j))?;
    let g = grid.len();
    let n = test.n_rows();
    let cls = class.unwrap_or(0);
    let matrix: Vec<Vec<F>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut x = test.row(i).to_vec();
            let y = test.target(i);
            grid.iter()
                .map(|&v| {
                    x[j] = v;
                    evaluate(&model.predict_dist(&x), metric, cls, y)
                })
                .collect::<Result<Vec<F>>>()
        })
        .collect::<Result<_>>()?;
    let nf = F::from_usize(n).unwrap();
    let pdp: Vec<F> = (0..g)
        .map(|t| matrix.iter().map(|row| row[t]).sum::<F>() / nf)
        .collect();
    let keep = subsample_ice(n, opts.max_curves, opts.seed);
    let origins = keep
        .iter()
        .map(|&i| {
            let row = test.row(i);
            let q = model.predict_dist(row);
            Ok(IceOrigin {
                row: i,
                feature_value: row[j],
                metric_value: evaluate(&q, metric, cls, test.target(i))?,
                complement: row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &v)| v).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ice = keep.iter().map(|&i| matrix[i].clone()).collect();
    Ok(CurveSet {
        feature_index: j,
        feature: test.feature_names()[j].clone(),
        metric,
        class,
        units: metric.units(test.task()).to_string(),
        grid,
        ice,
        pdp,
        origins,
        n_rows: n,
        seed: opts.seed,
    })
}

impl<F: Scalar> CurveSet<F> {
    fn header(&self) -> String {
        let class = self.class.map(|c| format!("; class: {c}")).unwrap_or_default();
        format!(
            "# feature: {}; metric: {}; units: {}{class}; seed: {}",
            self.feature, self.metric, self.units, self.seed
        )
    }

    /// Tidy CSV `example_id,grid_value,metric_value`: ICE rows use the test
    /// row index as id, PDP rows use the id `pdp`.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "{}", self.header())?;
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["example_id", "grid_value", "metric_value"])?;
        for (origin, row) in self.origins.iter().zip(&self.ice) {
            let id = origin.row.to_string();
            for (x, v) in self.grid.iter().zip(row) {
                w.write_record([id.as_str(), &x.to_string(), &v.to_string()])?;
            }
        }
        for (x, v) in self.grid.iter().zip(&self.pdp) {
            w.write_record(["pdp", &x.to_string(), &v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// CSV `grid_value,pdp`.
    pub fn write_pdp_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "{}", self.header())?;
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["grid_value", "pdp"])?;
        for (x, v) in self.grid.iter().zip(&self.pdp) {
            w.write_record([x.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Index of the grid point closest to `x`.
    pub fn nearest_grid_index(&self, x: F) -> usize {
        let mut best = 0;
        for (t, &g) in self.grid.iter().enumerate() {
            if (g - x).abs() < (self.grid[best] - x).abs() {
                best = t;
            }
        }
        best
    }
}
