//! Permutation importance against hand enumeration and exact invariances.

use proptest::prelude::*;
use uncertainty_importance::importance::{
    classic_pfi, conditional_entropy_pfi, entropy_pfi, feature_importance, importance_with_permutations,
    likelihood_pfi, ClassicLoss, GroupingSpec,
};
use uncertainty_importance::models::FnModel;
use uncertainty_importance::rng::Stream;
use uncertainty_importance::{
    pfi_all_features, Dataset, Measure, PermutationPlan, PfiOptions, PredictiveDistribution,
    ProbabilisticModel, TaskKind, Targets,
};

fn names(d: usize) -> Vec<String> {
    (1..=d).map(|j| format!("x{j}")).collect()
}

fn unit_gaussian_on_x1() -> impl ProbabilisticModel<f64> {
    FnModel::new(TaskKind::Regression, 2, |x: &[f64]| {
        PredictiveDistribution::gaussian(x[0], 1.0).unwrap()
    })
}

#[test]
fn three_row_enumeration() {
    let x1 = [0.5, -1.0, 2.0];
    let rows: Vec<Vec<f64>> = x1.iter().map(|&v| vec![v, 7.0]).collect();
    let ds = Dataset::from_rows(&rows, names(2), "y", Targets::Real(x1.to_vec())).unwrap();
    // row i receives the value of row perm[i]: the 1-based cycle (2, 3, 1)
    let perm = vec![1usize, 2, 0];
    let measures = [Measure::Likelihood, Measure::Classic, Measure::Entropy];
    let e = importance_with_permutations(&unit_gaussian_on_x1(), &ds, 0, &measures, &[perm.clone()], &PfiOptions::default())
        .unwrap();
    let sq: Vec<f64> = (0..3).map(|i| (x1[i] - x1[perm[i]]).powi(2)).collect();
    let want_nll = sq.iter().map(|v| v / 2.0).sum::<f64>() / 3.0;
    let want_sq = sq.iter().sum::<f64>() / 3.0;
    assert!((e[0].values[0] - want_nll).abs() < 1e-12);
    assert!((e[1].values[0] - want_sq).abs() < 1e-12);
    assert_eq!(e[2].values[0], 0.0);
    // baseline nll of a perfect mean under unit variance
    assert!((e[0].baseline - 0.5 * (2.0 * std::f64::consts::PI).ln()).abs() < 1e-12);
}

fn random_regression(n: usize, d: usize, seed: u64) -> Dataset<f64> {
    let mut s = Stream::new(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| s.normal()).collect()).collect();
    let y = rows.iter().map(|r| r[0] - r[1] + 0.3 * s.normal()).collect();
    Dataset::from_rows(&rows, names(d), "y", Targets::Real(y)).unwrap()
}

#[test]
fn fixed_variance_likelihood_is_scaled_squared_loss() {
    let sigma2 = 0.7;
    let model = FnModel::new(TaskKind::Regression, 3, move |x: &[f64]| {
        PredictiveDistribution::gaussian(x[0] - x[1] + 0.5 * x[2], sigma2).unwrap()
    });
    let ds = random_regression(80, 3, 1);
    let plan = PermutationPlan::new(5, 6);
    for j in 0..3 {
        let like = likelihood_pfi(&model, &ds, j, &plan).unwrap();
        let classic = classic_pfi(&model, &ds, j, &plan, ClassicLoss::SquaredErrorOnMean).unwrap();
        for (a, b) in like.values.iter().zip(&classic.values) {
            assert!((a - b / (2.0 * sigma2)).abs() < 1e-10);
        }
    }
}

#[test]
fn constant_uncertainty_has_zero_entropy_importance() {
    let model = FnModel::new(TaskKind::Regression, 3, |x: &[f64]| {
        PredictiveDistribution::gaussian(x[0] * x[1], 2.0).unwrap()
    });
    let ds = random_regression(50, 3, 2);
    let r = pfi_all_features(&model, &ds, &PermutationPlan::default(), &[Measure::Entropy], &PfiOptions::default()).unwrap();
    assert!(r.entries.iter().all(|e| e.values.iter().all(|&v| v == 0.0)));
}

#[test]
fn report_shape_and_determinism() {
    let model = FnModel::new(TaskKind::Regression, 4, |x: &[f64]| {
        PredictiveDistribution::gaussian(x[0], 0.5 + x[1] * x[1]).unwrap()
    });
    let ds = random_regression(40, 4, 3);
    let plan = PermutationPlan::new(17, 3);
    let measures = [Measure::Likelihood, Measure::Entropy];
    let a = pfi_all_features(&model, &ds, &plan, &measures, &PfiOptions::default()).unwrap();
    let b = pfi_all_features(&model, &ds, &plan, &measures, &PfiOptions::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.entries.len(), 2 * 4);
    for m in measures {
        let mut idx: Vec<usize> = a.by_measure(m).map(|e| e.feature_index).collect();
        idx.sort_unstable();
        assert_eq!(idx, vec![0, 1, 2, 3]);
    }
    let mut csv = Vec::new();
    a.write_csv(&mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 2 + 2 * 4 * 3);
}

#[test]
fn permutations_rearrange_the_column() {
    let plan = PermutationPlan::new(99, 5);
    for j in 0..3 {
        for r in 0..5 {
            let mut p = plan.permutation(j, r, 57);
            p.sort_unstable();
            assert_eq!(p, (0..57).collect::<Vec<_>>());
        }
    }
    assert_ne!(plan.permutation(0, 0, 57), plan.permutation(0, 1, 57));
    assert_ne!(plan.permutation(0, 0, 57), plan.permutation(1, 0, 57));
}

/// x1 and x2 share a discrete latent; the model's confidence depends on their agreement.
fn discrete_construction(n: usize, seed: u64) -> Dataset<f64> {
    let mut s = Stream::new(seed);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let z = s.below(3) as f64;
        let x1 = if s.uniform() < 0.8 { z } else { s.below(3) as f64 };
        rows.push(vec![x1, z]);
    }
    let y = rows.iter().map(|r| r[0] + r[1]).collect();
    Dataset::from_rows(&rows, names(2), "y", Targets::Real(y)).unwrap()
}

#[test]
fn conditional_entropy_vanishes_on_discrete_groups() {
    let model = FnModel::new(TaskKind::Regression, 2, |x: &[f64]| {
        let disagree = (x[0] - x[1]).abs();
        PredictiveDistribution::gaussian(x[0] + x[1], 0.2 + disagree).unwrap()
    });
    let ds = discrete_construction(600, 4);
    let plan = PermutationPlan::new(8, 10);
    let cond = conditional_entropy_pfi(&model, &ds, 0, &plan, GroupingSpec::ExactMatch).unwrap();
    let plain = entropy_pfi(&model, &ds, 0, &plan).unwrap();
    assert!(cond.mean.abs() <= 3.0 * cond.std_error, "{cond:?}");
    assert!(plain.mean >= 5.0 * plain.std_error && plain.mean > 0.0, "{plain:?}");
    assert!(cond.warning.is_none());
}

#[test]
fn quantile_grouping_also_runs() {
    let model = FnModel::new(TaskKind::Regression, 3, |x: &[f64]| {
        PredictiveDistribution::gaussian(x[0], 1.0 + x[0].abs()).unwrap()
    });
    let ds = random_regression(60, 3, 5);
    let opts = PfiOptions {
        grouping: GroupingSpec::QuantileBins { bins: 2 },
        ..PfiOptions::default()
    };
    let e = feature_importance(&model, &ds, 0, &PermutationPlan::default(), &[Measure::ConditionalEntropy], &opts).unwrap();
    assert_eq!(e[0].measure, Measure::ConditionalEntropy);
    assert_eq!(e[0].values.len(), 10);
}

#[test]
fn misclassification_loss_on_classifier() {
    let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, (i % 3) as f64]).collect();
    let labels: Vec<usize> = (0..40).map(|i| usize::from(i >= 20)).collect();
    let ds = Dataset::from_rows(
        &rows,
        names(2),
        "y",
        Targets::Class {
            labels,
            class_names: vec!["a".into(), "b".into()],
        },
    )
    .unwrap();
    let model = FnModel::new(TaskKind::Classification { n_classes: 2 }, 2, |x: &[f64]| {
        let p = if x[0] >= 19.5 { 0.9 } else { 0.1 };
        PredictiveDistribution::categorical(vec![1.0 - p, p]).unwrap()
    });
    let plan = PermutationPlan::new(2, 8);
    let used = classic_pfi(&model, &ds, 0, &plan, ClassicLoss::MisclassificationOnArgmax).unwrap();
    let unused = classic_pfi(&model, &ds, 1, &plan, ClassicLoss::MisclassificationOnArgmax).unwrap();
    assert_eq!(used.baseline, 0.0);
    assert!(used.mean > 0.3);
    assert_eq!(unused.mean, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// A model that never reads feature j has exactly zero likelihood and entropy importance for j.
    #[test]
    fn ignored_feature_is_exactly_zero(seed in any::<u64>(), n in 2usize..40, j in 0usize..3) {
        let ds = random_regression(n, 3, seed);
        let model = FnModel::new(TaskKind::Regression, 3, move |x: &[f64]| {
            let used: f64 = (0..3).filter(|&c| c != j).map(|c| x[c]).sum();
            PredictiveDistribution::gaussian(used.sin(), 0.1 + used * used).unwrap()
        });
        let plan = PermutationPlan::new(seed ^ 1, 3);
        let e = feature_importance(&model, &ds, j, &plan, &[Measure::Likelihood, Measure::Entropy], &PfiOptions::default()).unwrap();
        for entry in e {
            prop_assert!(entry.values.iter().all(|&v| v.abs() <= 1e-12));
        }
    }
}
