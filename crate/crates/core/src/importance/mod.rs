//! Permutation feature importance on statistics of the predictive distribution.
//!
//! For feature `j` and one permutation `pi` of the test rows, each measure is
//! the mean over rows of `stat(q(. | x_-j, x_pi(i),j)) - stat(q(. | x))`, so
//! every value reads "permuted minus baseline":
//!
//! * likelihood: negative log-likelihood of the true target;
//! * entropy: entropy of the predictive distribution (labels are not read);
//! * classic: a point loss on the predictive mean or argmax class;
//! * conditional entropy: entropy, with rows permuted only within groups that
//!   agree on the other features.
//!
//! Repeat `r` for feature `j` draws its permutation from a stream derived from
//! `(seed, j, r)` alone, so every measure sees the same permutations and the
//! result does not depend on scheduling.

mod grouping;
mod report;

pub use grouping::{group_rows, grouped_permutation, GroupingSpec, DEFAULT_QUANTILE_BINS};
pub use report::{ImportanceEntry, ImportanceReport};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::distributions::{PredictiveDistribution, Target, TaskKind};
use crate::error::{Error, Result};
use crate::models::ProbabilisticModel;
use crate::rng::Stream;
use crate::scalar::Scalar;

/// Seed and repeat count shared by all measures of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationPlan {
    pub seed: u64,
    pub n_repeats: usize,
}

impl PermutationPlan {
    pub fn new(seed: u64, n_repeats: usize) -> Self {
        PermutationPlan { seed, n_repeats }
    }

    /// Random stream for repeat `r` of feature `j`.
    pub fn stream(&self, j: usize, r: usize) -> Stream {
        Stream::new(self.seed)
            .fork("permutation")
            .fork_index(j as u64)
            .fork_index(r as u64)
    }

    /// Uniform permutation of `n` rows for repeat `r` of feature `j`.
    pub fn permutation(&self, j: usize, r: usize, n: usize) -> Vec<usize> {
        self.stream(j, r).permutation(n)
    }

    fn validate(&self) -> Result<()> {
        if self.n_repeats == 0 {
            return Err(Error::invalid("permutation plan needs at least one repeat"));
        }
        Ok(())
    }
}

impl Default for PermutationPlan {
    fn default() -> Self {
        PermutationPlan {
            seed: 0,
            n_repeats: 10,
        }
    }
}

/// Point loss for classic PFI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicLoss {
    /// `(y - mean)^2` on the Gaussian predictive mean.
    SquaredErrorOnMean,
    /// `1[argmax != y]` on the categorical prediction.
    MisclassificationOnArgmax,
}

impl ClassicLoss {
    /// The loss matching a task.
    pub fn for_task(task: TaskKind) -> Self {
        if task.is_regression() {
            ClassicLoss::SquaredErrorOnMean
        } else {
            ClassicLoss::MisclassificationOnArgmax
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Classic,
    Likelihood,
    Entropy,
    ConditionalEntropy,
}

impl Measure {
    pub const ALL: [Measure; 4] = [
        Measure::Classic,
        Measure::Likelihood,
        Measure::Entropy,
        Measure::ConditionalEntropy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Classic => "classic",
            Measure::Likelihood => "likelihood",
            Measure::Entropy => "entropy",
            Measure::ConditionalEntropy => "conditional_entropy",
        }
    }

    /// Unit of the reported values.
    pub fn units(self) -> &'static str {
        match self {
            Measure::Classic => "loss",
            _ => "nats",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| {
                let valid: Vec<&str> = Measure::ALL.iter().map(|m| m.name()).collect();
                Error::invalid(format!(
                    "unknown measure '{s}' (valid: {})",
                    valid.join(", ")
                ))
            })
    }
}

/// Settings for the measures that need more than a plan.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PfiOptions {
    /// `None` picks the loss matching the model's task.
    pub classic_loss: Option<ClassicLoss>,
    pub grouping: GroupingSpec,
}

/// Per-row statistic behind each measure.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Statistic {
    Nll,
    Entropy,
    Loss(ClassicLoss),
}

impl Statistic {
    fn eval<F: Scalar>(self, q: &PredictiveDistribution<F>, y: Target<F>) -> Result<F> {
        match self {
            Statistic::Nll => q.nll(y),
            Statistic::Entropy => Ok(q.entropy()),
            Statistic::Loss(loss) => match (loss, q, y) {
                (ClassicLoss::SquaredErrorOnMean, PredictiveDistribution::Gaussian(g), Target::Real(v)) => {
                    let e = v - g.mean();
                    Ok(e * e)
                }
                (
                    ClassicLoss::MisclassificationOnArgmax,
                    PredictiveDistribution::Categorical(c),
                    Target::Class(k),
                ) => Ok(if c.argmax() == k { F::zero() } else { F::one() }),
                _ => Err(Error::TaskMismatch {
                    expected: format!("{loss:?}"),
                    found: q.task().to_string(),
                }),
            },
        }
    }
}

fn statistic_for(measure: Measure, task: TaskKind, opts: &PfiOptions) -> Statistic {
    match measure {
        Measure::Classic => Statistic::Loss(opts.classic_loss.unwrap_or(ClassicLoss::for_task(task))),
        Measure::Likelihood => Statistic::Nll,
        Measure::Entropy | Measure::ConditionalEntropy => Statistic::Entropy,
    }
}

/// Checks that the model and test set agree on task and width.
pub fn check_compatible<F: Scalar, M: ProbabilisticModel<F> + ?Sized>(model: &M, test: &Dataset<F>) -> Result<()> {
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
    if test.n_rows() < 2 {
        return Err(Error::invalid("permutation importance needs at least 2 test rows"));
    }
    Ok(())
}

/// Per-row statistics on the unpermuted test set, one vector per statistic.
fn baseline_rows<F: Scalar, M: ProbabilisticModel<F> + ?Sized>(
    model: &M,
    test: &Dataset<F>,
    stats: &[Statistic],
) -> Result<Vec<Vec<F>>> {
    let per_row: Vec<Vec<F>> = (0..test.n_rows())
        .into_par_iter()
        .map(|i| {
            let q = model.predict_dist(test.row(i));
            stats.iter().map(|s| s.eval(&q, test.target(i))).collect::<Result<Vec<F>>>()
        })
        .collect::<Result<_>>()?;
    Ok(transpose(per_row, stats.len()))
}

fn transpose<F: Copy>(rows: Vec<Vec<F>>, k: usize) -> Vec<Vec<F>> {
    (0..k).map(|s| rows.iter().map(|r| r[s]).collect()).collect()
}

/// Mean over rows of `stat(permuted) - stat(baseline)` for each statistic.
fn permuted_differences<F: Scalar, M: ProbabilisticModel<F> + ?Sized>(
    model: &M,
    test: &Dataset<F>,
    j: usize,
    perm: &[usize],
    stats: &[Statistic],
    baseline: &[Vec<F>],
) -> Result<Vec<F>> {
    let n = test.n_rows();
    let diffs: Vec<Vec<F>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut x = test.row(i).to_vec();
            x[j] = test.value(perm[i], j);
            let q = model.predict_dist(&x);
            stats
                .iter()
                .zip(baseline)
                .map(|(s, base)| Ok(s.eval(&q, test.target(i))? - base[i]))
                .collect::<Result<Vec<F>>>()
        })
        .collect::<Result<_>>()?;
    let nf = F::from_usize(n).unwrap();
    Ok((0..stats.len())
        .map(|s| diffs.iter().map(|d| d[s]).sum::<F>() / nf)
        .collect())
}

/// Importance of feature `j` under explicitly given permutations.
///
/// Returns one entry per measure, in the order given, with one value per
/// permutation. `ConditionalEntropy` is treated as plain entropy here: the
/// caller decides which rows are exchanged.
pub fn importance_with_permutations<F: Scalar, M: ProbabilisticModel<F> + ?Sized>(
    model: &M,
    test: &Dataset<F>,
    j: usize,
    measures: &[Measure],
    permutations: &[Vec<usize>],
    opts: &PfiOptions,
) -> Result<Vec<ImportanceEntry<F>>> {
    check_compatible(model, test)?;
    test.check_feature(j)?;
    let n = test.n_rows();
    if permutations.is_empty() {
        return Err(Error::invalid("at least one permutation is required"));
    }
    for p in permutations {
        if !is_permutation(p, n) {
            return Err(Error::invalid(format!("not a permutation of {n} rows")));
        }
    }
    let task = model.task();
    let stats: Vec<Statistic> = measures.iter().map(|&m| statistic_for(m, task, opts)).collect();
    let baseline = baseline_rows(model, test, &stats)?;
    let mut values = vec![Vec::with_capacity(permutations.len()); measures.len()];
    for p in permutations {
        let diffs = permuted_differences(model, test, j, p, &stats, &baseline)?;
        for (v, d) in values.iter_mut().zip(diffs) {
            v.push(d);
        }
    }
    let nf = F::from_usize(n).unwrap();
    Ok(measures
        .iter()
        .zip(values)
        .zip(&baseline)
        .map(|((&m, vals), base)| {
            let b = base.iter().copied().sum::<F>() / nf;
            ImportanceEntry::from_values(test.feature_names()[j].clone(), j, m, b, vals)
        })
        .collect())
}

fn is_permutation(p: &[usize], n: usize) -> bool {
    if p.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    p.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
}

/// Entries for feature `j`, one per requested measure, drawing permutations from `plan`.
pub fn feature_importance<F: Scalar, M: ProbabilisticModel<F> + ?Sized>(
    model: &M,
    test: &Dataset<F>,
    j: usize,
    plan: &PermutationPlan,
    measures: &[Measure],
    opts: &PfiOptions,
) -> Result<Vec<ImportanceEntry<F>>> {
    plan.validate()?;
    check_compatible(model, test)?;
    test.check_feature(j)?;
    let n = test.n_rows();
    let marginal: Vec<Measure> = measures
        .iter()
        .copied()
        .filter(|&m| m != Measure::ConditionalEntropy)
        .collect();
    let mut by_measure: Vec<(Measure, ImportanceEntry<F>)> = Vec::new();
    if !marginal.is_empty() {
        let perms: Vec<Vec<usize>> = (0..plan.n_repeats).map(|r| plan.permutation(j, r, n)).collect();
        let entries = importance_with_permutations(model, test, j, &marginal, &perms, opts)?;
        by_measure.extend(marginal.iter().copied().zip(entries));
    }
    if measures.contains(&Measure::ConditionalEntropy) {
        let groups = group_rows(test, j, opts.grouping);
        let perms: Vec<Vec<usize>> = (0..plan.n_repeats)
            .map(|r| grouped_permutation(&groups, n, &mut plan.stream(j, r).fork("conditional")))
            .collect();
        let mut entry = importance_with_permutations(model, test, j, &[Measure::Entropy], &perms, opts)?
            .pop()
            .expect("one measure requested");
        entry.measure = Measure::ConditionalEntropy;
        if groups.iter().all(|g| g.len() < 2) {
            entry.warning = Some(
                "every conditioning group is a single row; permutations are no-ops".to_string(),
            );
        }
        by_measure.push((Measure::ConditionalEntropy, entry));
    }
    Ok(measures
        .iter()
        .map(|m| {
            by_measure
                .iter()
                .find(|(k, _)| k == m)
                .map(|(_, e)| e.clone())
                .expect("every requested measure was computed")
        })
        .collect())
}

fn single<F: Scalar, M: ProbabilisticModel<F> + ?Sized>(
    model: &M,
    test: &Dataset<F>,
    j: usize,
    plan: &PermutationPlan,
    measure: Measure,
    opts: &PfiOptions,
) -> Result<ImportanceEntry<F>> {
    Ok(feature_importance(model, test, j, plan, &[measure], opts)?
        .pop()
        .expect("one measure requested"))
}

/// Mean increase in negative log-likelihood when feature `j` is permuted.
pub fn likelihood_pfi<F: Scalar, M: ProbabilisticModel<F> + ?Sized>(
    model: &M,
    test: &Dataset<F>,
    j: usize,
    plan: &PermutationPlan,
) -> Result<ImportanceEntry<F>> {
    single(model, test, j, plan, Measure::Likelihood, &PfiOptions::default())
}

/// Mean increase in predictive entropy when feature `j` is permuted.
pub fn entropy_pfi<F: Scalar, M: ProbabilisticModel<F> + ?Sized>(
    model: &M,
    test: &Dataset<F>,
    j: usize,
    plan: &PermutationPlan,
) -> Result<ImportanceEntry<F>> {
    single(model, test, j, plan, Measure::Entropy, &PfiOptions::default())
}

/// Mean increase in a point loss when feature `j` is permuted.
pub fn classic_pfi<F: Scalar, M: ProbabilisticModel<F> + ?Sized>(
    model: &M,
    test: &Dataset<F>,
    j: usize,
    plan: &PermutationPlan,
    loss: ClassicLoss,
) -> Result<ImportanceEntry<F>> {
    let opts = PfiOptions {
        classic_loss: Some(loss),
        ..PfiOptions::default()
    };
    single(model, test, j, plan, Measure::Classic, &opts)
}

/// Entropy PFI with permutations restricted to groups of similar rows.
pub fn conditional_entropy_pfi<F: Scalar, M: ProbabilisticModel<F> + ?Sized>(
    model: &M,
    test: &Dataset<F>,
    j: usize,
    plan: &PermutationPlan,
    grouping: GroupingSpec,
) -> Result<ImportanceEntry<F>> {
    let opts = PfiOptions {
        grouping,
        ..PfiOptions::default()
    };
    single(model, test, j, plan, Measure::ConditionalEntropy, &opts)
}

/// Every requested measure for every feature; entries are ordered by measure, then feature.
pub fn pfi_all_features<F: Scalar, M: ProbabilisticModel<F> + ?Sized>(
    model: &M,
    test: &Dataset<F>,
    plan: &PermutationPlan,
    measures: &[Measure],
    opts: &PfiOptions,
) -> Result<ImportanceReport<F>> {
    if measures.is_empty() {
        return Err(Error::invalid("no importance measures requested"));
    }
    let mut unique: Vec<Measure> = Vec::with_capacity(measures.len());
    for &m in measures {
        if !unique.contains(&m) {
            unique.push(m);
        }
    }
    let per_feature: Vec<Vec<ImportanceEntry<F>>> = (0..test.n_features())
        .map(|j| feature_importance(model, test, j, plan, &unique, opts))
        .collect::<Result<_>>()?;
    let mut entries = Vec::with_capacity(unique.len() * test.n_features());
    for (mi, _) in unique.iter().enumerate() {
        for f in &per_feature {
            entries.push(f[mi].clone());
        }
    }
    Ok(ImportanceReport {
        seed: plan.seed,
        n_repeats: plan.n_repeats,
        n_rows: test.n_rows(),
        task: test.task(),
        units: "nats".to_string(),
        entries,
    })
}
