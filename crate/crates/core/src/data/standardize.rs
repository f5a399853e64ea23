use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Targets};
use crate::error::Result;
use crate::scalar::{mean, population_sd, Scalar};

/// Per-column affine scaling fitted on training data.
///
/// Uses the population standard deviation; constant columns get a scale of 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct Standardizer<F> {
    pub means: Vec<F>,
    pub sds: Vec<F>,
    /// Present only when fitted on a regression target.
    pub target: Option<(F, F)>,
}

fn safe_sd<F: Scalar>(sd: F) -> F {
    if sd > F::zero() && sd.is_finite() {
        sd
    } else {
        F::one()
    }
}

impl<F: Scalar> Standardizer<F> {
    pub fn fit(train: &Dataset<F>) -> Standardizer<F> {
        let (means, sds) = (0..train.n_features())
            .map(|j| {
                let col = train.column(j);
                (mean(&col), safe_sd(population_sd(&col)))
            })
            .unzip();
        let target = train
            .real_targets()
            .map(|y| (mean(y), safe_sd(population_sd(y))));
        Standardizer { means, sds, target }
    }

    /// Scaling that leaves every value unchanged.
    pub fn identity(n_features: usize) -> Standardizer<F> {
        Standardizer {
            means: vec![F::zero(); n_features],
            sds: vec![F::one(); n_features],
            target: None,
        }
    }

    pub fn transform_row(&self, x: &[F]) -> Vec<F> {
        x.iter()
            .zip(self.means.iter().zip(&self.sds))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect()
    }

    pub fn invert_row(&self, z: &[F]) -> Vec<F> {
        z.iter()
            .zip(self.means.iter().zip(&self.sds))
            .map(|(&v, (&m, &s))| v * s + m)
            .collect()
    }

    pub fn transform_target(&self, y: F) -> F {
        match self.target {
            Some((m, s)) => (y - m) / s,
            None => y,
        }
    }

    pub fn invert_target(&self, z: F) -> F {
        match self.target {
            Some((m, s)) => z * s + m,
            None => z,
        }
    }

    /// Multiplier that maps a variance on the standardized target scale back to target units.
    pub fn target_variance_scale(&self) -> F {
        self.target.map(|(_, s)| s * s).unwrap_or_else(F::one)
    }

    /// Applies the feature scaling (and the target scaling, if fitted) to a dataset.
    pub fn apply(&self, ds: &Dataset<F>) -> Result<Dataset<F>> {
        let features: Vec<F> = ds.rows().flat_map(|r| self.transform_row(r)).collect();
        let out = ds.with_features(features)?;
        match (ds.targets(), self.target.is_some()) {
            (Targets::Real(y), true) => out.with_targets(
                ds.target_name(),
                Targets::Real(y.iter().map(|&v| self.transform_target(v)).collect()),
            ),
            _ => Ok(out),
        }
    }

    pub fn invert(&self, ds: &Dataset<F>) -> Result<Dataset<F>> {
        let features: Vec<F> = ds.rows().flat_map(|r| self.invert_row(r)).collect();
        let out = ds.with_features(features)?;
        match (ds.targets(), self.target.is_some()) {
            (Targets::Real(y), true) => out.with_targets(
                ds.target_name(),
                Targets::Real(y.iter().map(|&v| self.invert_target(v)).collect()),
            ),
            _ => Ok(out),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ds(rows: &[Vec<f64>]) -> Dataset<f64> {
        let d = rows[0].len();
        let names = (0..d).map(|j| format!("f{j}")).collect();
        let y = rows.iter().map(|r| r.iter().sum()).collect();
        Dataset::from_rows(rows, names, "y", Targets::Real(y)).unwrap()
    }

    #[test]
    fn two_point_case() {
        let train = ds(&[vec![0.0], vec![2.0]]);
        let s = Standardizer::fit(&train);
        assert_eq!(s.means, vec![1.0]);
        assert_eq!(s.sds, vec![1.0]);
        let t = s.apply(&train).unwrap();
        assert_eq!(t.column(0), vec![-1.0, 1.0]);
    }

    #[test]
    fn constant_column_unchanged_in_scale() {
        let train = ds(&[vec![3.0, 1.0], vec![3.0, 5.0]]);
        let s = Standardizer::fit(&train);
        assert_eq!(s.sds[0], 1.0);
        assert_eq!(s.transform_row(&[3.0, 1.0])[0], 0.0);
        assert_eq!(s.transform_row(&[4.0, 1.0])[0], 1.0);
    }

    proptest! {
        #[test]
        fn standardized_moments_and_round_trip(
            rows in prop::collection::vec(prop::collection::vec(-100.0_f64..100.0, 2), 3..40)
        ) {
            let train = ds(&rows);
            let s = Standardizer::fit(&train);
            let t = s.apply(&train).unwrap();
            for j in 0..2 {
                let col = t.column(j);
                let raw_sd = population_sd(&train.column(j));
                if raw_sd > 1e-6 {
                    prop_assert!(mean(&col).abs() < 1e-9);
                    prop_assert!((population_sd(&col) - 1.0).abs() < 1e-9);
                }
            }
            let back = s.invert(&t).unwrap();
            for (a, b) in back.features().iter().zip(train.features()) {
                prop_assert!((a - b).abs() < 1e-9);
            }
            for (a, b) in back.real_targets().unwrap().iter().zip(train.real_targets().unwrap()) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
