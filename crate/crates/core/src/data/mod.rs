//! Tabular datasets: container, CSV ingestion, seeded splitting and standardization.

mod csv_io;
mod standardize;

pub use csv_io::{load_csv, read_csv, write_csv, CsvOptions, TargetSpec};
pub use standardize::Standardizer;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::distributions::{Target, TaskKind};
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::scalar::Scalar;

/// Target column of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", bound = "F: Scalar")]
pub enum Targets<F> {
    Real(Vec<F>),
    /// 0-based class indices into `class_names`.
    Class {
        labels: Vec<usize>,
        class_names: Vec<String>,
    },
}

impl<F: Scalar> Targets<F> {
    pub fn len(&self) -> usize {
        match self {
            Targets::Real(v) => v.len(),
            Targets::Class { labels, .. } => labels.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn select(&self, rows: &[usize]) -> Self {
        match self {
            Targets::Real(v) => Targets::Real(rows.iter().map(|&i| v[i]).collect()),
            Targets::Class {
                labels,
                class_names,
            } => Targets::Class {
                labels: rows.iter().map(|&i| labels[i]).collect(),
                class_names: class_names.clone(),
            },
        }
    }
}

/// An immutable `n x d` feature matrix with its target column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<F> {
    features: Vec<F>,
    n_rows: usize,
    n_features: usize,
    feature_names: Vec<String>,
    target_name: String,
    targets: Targets<F>,
}

/// Serializable description of a dataset, written alongside results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub n_rows: usize,
    pub feature_names: Vec<String>,
    pub target_name: String,
    pub task: TaskKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_names: Option<Vec<String>>,
}

impl<F: Scalar> Dataset<F> {
    /// Builds a dataset from a row-major feature buffer.
    pub fn new(
        features: Vec<F>,
        feature_names: Vec<String>,
        target_name: impl Into<String>,
        targets: Targets<F>,
    ) -> Result<Self> {
        let n_features = feature_names.len();
        if n_features == 0 {
            return Err(Error::invalid("dataset needs at least one feature"));
        }
        let n_rows = targets.len();
        if n_rows == 0 {
            return Err(Error::invalid("dataset needs at least one row"));
        }
        if features.len() != n_rows * n_features {
            return Err(Error::invalid(format!(
                "feature buffer has {} values, expected {n_rows} x {n_features}",
                features.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::invalid(format!("duplicate feature name '{name}'")));
            }
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite feature value at row {}, feature '{}'",
                pos / n_features,
                feature_names[pos % n_features]
            )));
        }
        match &targets {
            Targets::Real(v) => {
                if let Some(i) = v.iter().position(|t| !t.is_finite()) {
                    return Err(Error::invalid(format!("non-finite target at row {i}")));
                }
            }
            Targets::Class {
                labels,
                class_names,
            } => {
                TaskKind::classification(class_names.len())?;
                if let Some(i) = labels.iter().position(|&c| c >= class_names.len()) {
                    return Err(Error::invalid(format!(
                        "class index {} at row {i} out of range for {} classes",
                        labels[i],
                        class_names.len()
                    )));
                }
            }
        }
        Ok(Dataset {
            features,
            n_rows,
            n_features,
            feature_names,
            target_name: target_name.into(),
            targets,
        })
    }

    /// Convenience constructor from row vectors.
    pub fn from_rows(
        rows: &[Vec<F>],
        feature_names: Vec<String>,
        target_name: impl Into<String>,
        targets: Targets<F>,
    ) -> Result<Self> {
        let d = feature_names.len();
        if let Some(r) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::invalid(format!(
                "row has {} values, expected {d}",
                r.len()
            )));
        }
        Self::new(rows.concat(), feature_names, target_name, targets)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn targets(&self) -> &Targets<F> {
        &self.targets
    }

    /// Row-major feature buffer.
    pub fn features(&self) -> &[F] {
        &self.features
    }

    pub fn task(&self) -> TaskKind {
        match &self.targets {
            Targets::Real(_) => TaskKind::Regression,
            Targets::Class { class_names, .. } => TaskKind::Classification {
                n_classes: class_names.len(),
            },
        }
    }

    pub fn class_names(&self) -> Option<&[String]> {
        match &self.targets {
            Targets::Class { class_names, .. } => Some(class_names),
            Targets::Real(_) => None,
        }
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[F]> {
        self.features.chunks_exact(self.n_features)
    }

    pub fn value(&self, i: usize, j: usize) -> F {
        self.features[i * self.n_features + j]
    }

    pub fn column(&self, j: usize) -> Vec<F> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn target(&self, i: usize) -> Target<F> {
        match &self.targets {
            Targets::Real(v) => Target::Real(v[i]),
            Targets::Class { labels, .. } => Target::Class(labels[i]),
        }
    }

    pub fn real_targets(&self) -> Option<&[F]> {
        match &self.targets {
            Targets::Real(v) => Some(v),
            Targets::Class { .. } => None,
        }
    }

    pub fn class_labels(&self) -> Option<&[usize]> {
        match &self.targets {
            Targets::Class { labels, .. } => Some(labels),
            Targets::Real(_) => None,
        }
    }

    pub fn check_feature(&self, j: usize) -> Result<()> {
        if j >= self.n_features {
            return Err(Error::FeatureOutOfRange {
                index: j,
                n_features: self.n_features,
            });
        }
        Ok(())
    }

    pub fn feature_index(&self, name: &str) -> Result<usize> {
        self.feature_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownFeature {
                name: name.to_string(),
                available: self.feature_names.clone(),
            })
    }

    /// New dataset restricted to `rows` (in the given order).
    pub fn select_rows(&self, rows: &[usize]) -> Dataset<F> {
        let mut features = Vec::with_capacity(rows.len() * self.n_features);
        for &i in rows {
            features.extend_from_slice(self.row(i));
        }
        Dataset {
            features,
            n_rows: rows.len(),
            n_features: self.n_features,
            feature_names: self.feature_names.clone(),
            target_name: self.target_name.clone(),
            targets: self.targets.select(rows),
        }
    }

    /// Copy with the features replaced by a transformed buffer of the same shape.
    pub fn with_features(&self, features: Vec<F>) -> Result<Dataset<F>> {
        Dataset::new(
            features,
            self.feature_names.clone(),
            self.target_name.clone(),
            self.targets.clone(),
        )
    }

    /// Copy with different targets (same rows).
    pub fn with_targets(&self, target_name: impl Into<String>, targets: Targets<F>) -> Result<Dataset<F>> {
        Dataset::new(
            self.features.clone(),
            self.feature_names.clone(),
            target_name,
            targets,
        )
    }

    pub fn meta(&self) -> DatasetMeta {
        DatasetMeta {
            n_rows: self.n_rows,
            feature_names: self.feature_names.clone(),
            target_name: self.target_name.clone(),
            task: self.task(),
            class_names: self.class_names().map(|c| c.to_vec()),
        }
    }
}

/// Train/test split settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Self {
        SplitSpec {
            train_fraction,
            seed,
        }
    }

    /// `(train, test)` sizes for `n` rows.
    pub fn sizes(&self, n: usize) -> Result<(usize, usize)> {
        let f = self.train_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::invalid(format!(
                "train fraction must lie in (0, 1), got {f}"
            )));
        }
        let n_train = (f * n as f64).round() as usize;
        if n_train < 1 || n_train >= n {
            return Err(Error::invalid(format!(
                "train fraction {f} leaves an empty part for {n} rows"
            )));
        }
        Ok((n_train, n - n_train))
    }

    /// Row indices of the two parts, each in shuffled order.
    pub fn indices(&self, n: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        let (n_train, _) = self.sizes(n)?;
        let mut perm = Stream::new(self.seed).fork("split").permutation(n);
        let test = perm.split_off(n_train);
        Ok((perm, test))
    }
}

/// Seeded disjoint train/test partition.
pub fn split<F: Scalar>(ds: &Dataset<F>, spec: SplitSpec) -> Result<(Dataset<F>, Dataset<F>)> {
    let (train, test) = spec.indices(ds.n_rows())?;
    Ok((ds.select_rows(&train), ds.select_rows(&test)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(d: usize) -> Vec<String> {
        (1..=d).map(|j| format!("x{j}")).collect()
    }

    fn toy(n: usize) -> Dataset<f64> {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let y = (0..n).map(|i| i as f64 * 0.5).collect();
        Dataset::from_rows(&rows, names(2), "y", Targets::Real(y)).unwrap()
    }

    #[test]
    fn rejects_bad_datasets() {
        let t = Targets::Real(vec![1.0_f64]);
        assert!(Dataset::new(vec![1.0], vec![], "y", t.clone()).is_err());
        assert!(Dataset::new(vec![f64::NAN], names(1), "y", t.clone()).is_err());
        assert!(Dataset::new(vec![1.0, 2.0], vec!["a".into(), "a".into()], "y", t).is_err());
        let c = Targets::Class {
            labels: vec![2],
            class_names: vec!["a".into(), "b".into()],
        };
        assert!(Dataset::new(vec![1.0_f64], names(1), "y", c).is_err());
        let one_class = Targets::Class {
            labels: vec![0],
            class_names: vec!["a".into()],
        };
        assert!(Dataset::new(vec![1.0_f64], names(1), "y", one_class).is_err());
    }

    #[test]
    fn benchmark_split_sizes() {
        assert_eq!(SplitSpec::new(0.75, 0).sizes(5000).unwrap(), (3750, 1250));
        assert_eq!(SplitSpec::new(0.5, 0).sizes(1000).unwrap(), (500, 500));
        assert!(SplitSpec::new(1.0, 0).sizes(10).is_err());
        assert!(SplitSpec::new(0.01, 0).sizes(10).is_err());
    }

    #[test]
    fn split_deterministic() {
        let ds = toy(4);
        let a = split(&ds, SplitSpec::new(0.5, 11)).unwrap();
        let b = split(&ds, SplitSpec::new(0.5, 11)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.0.n_rows(), 2);
    }

    #[test]
    fn select_rows_keeps_targets_aligned() {
        let ds = toy(5);
        let sub = ds.select_rows(&[4, 1]);
        assert_eq!(sub.row(0), &[4.0, 16.0]);
        assert_eq!(sub.target(1), Target::Real(0.5));
    }

    proptest! {
        #[test]
        fn split_is_partition(n in 2usize..300, frac in 0.05_f64..0.95, seed in any::<u64>()) {
            let spec = SplitSpec::new(frac, seed);
            if let Ok((tr, te)) = spec.indices(n) {
                let mut all: Vec<usize> = tr.iter().chain(te.iter()).copied().collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
                prop_assert!(!tr.is_empty() && !te.is_empty());
            }
        }
    }
}
