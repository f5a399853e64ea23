//! Predictive distributions and the two functionals every importance measure
//! is built from: entropy and negative log-likelihood, both in nats.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Lower clamp applied to class probabilities inside [`PredictiveDistribution::nll`].
pub const NLL_PROB_FLOOR: f64 = 1e-12;

/// Kind of prediction task a dataset or model is set up for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TaskKind {
    Classification { n_classes: usize },
    Regression,
}

impl TaskKind {
    pub fn classification(n_classes: usize) -> Result<Self> {
        if n_classes < 2 {
            return Err(Error::invalid(format!(
                "classification needs at least 2 classes, got {n_classes}"
            )));
        }
        Ok(TaskKind::Classification { n_classes })
    }

    pub fn is_regression(&self) -> bool {
        matches!(self, TaskKind::Regression)
    }

    pub fn n_classes(&self) -> Option<usize> {
        match *self {
            TaskKind::Classification { n_classes } => Some(n_classes),
            TaskKind::Regression => None,
        }
    }
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TaskKind::Classification { n_classes } => write!(f, "classification({n_classes})"),
            TaskKind::Regression => write!(f, "regression"),
        }
    }
}

/// One observed target: a real value or a 0-based class index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target<F> {
    Real(F),
    Class(usize),
}

/// Categorical distribution over `k >= 2` classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<F>", into = "Vec<F>", bound = "F: Scalar")]
pub struct Categorical<F> {
    probs: Vec<F>,
}

impl<F: Scalar> Categorical<F> {
    pub fn new(probs: Vec<F>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::invalid(format!(
                "categorical distribution needs k >= 2 classes, got {}",
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= F::zero())) {
            return Err(Error::invalid(format!("invalid class probability {p}")));
        }
        let total: F = probs.iter().copied().sum();
        if (total - F::one()).abs() > F::prob_tolerance() {
            return Err(Error::invalid(format!(
                "class probabilities sum to {total}, not 1"
            )));
        }
        Ok(Categorical { probs })
    }

    /// Normalizes non-negative weights into a distribution.
    pub fn from_weights(weights: Vec<F>) -> Result<Self> {
        let total: F = weights.iter().copied().sum();
        if !(total > F::zero()) || !total.is_finite() {
            return Err(Error::invalid("weights must have a positive finite sum"));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn probs(&self) -> &[F] {
        &self.probs
    }

    pub fn n_classes(&self) -> usize {
        self.probs.len()
    }

    /// Index of the most probable class (lowest index on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (c, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = c;
            }
        }
        best
    }

    /// Shannon entropy; `0 log 0` is taken as 0.
    pub fn entropy(&self) -> F {
        -self
            .probs
            .iter()
            .filter(|&&p| p > F::zero())
            .map(|&p| p * p.ln())
            .sum::<F>()
    }

    pub fn nll(&self, class: usize) -> Result<F> {
        let p = self.probs.get(class).ok_or_else(|| {
            Error::invalid(format!(
                "class index {class} out of range for {} classes",
                self.probs.len()
            ))
        })?;
        Ok(-p.max(F::lit(NLL_PROB_FLOOR)).ln())
    }
}

impl<F: Scalar> TryFrom<Vec<F>> for Categorical<F> {
    type Error = Error;
    fn try_from(v: Vec<F>) -> Result<Self> {
        Self::new(v)
    }
}

impl<F> From<Categorical<F>> for Vec<F> {
    fn from(c: Categorical<F>) -> Self {
        c.probs
    }
}

/// Univariate Gaussian with strictly positive variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaussianRepr<F>", into = "GaussianRepr<F>", bound = "F: Scalar")]
pub struct Gaussian<F> {
    mean: F,
    variance: F,
}

#[derive(Serialize, Deserialize)]
struct GaussianRepr<F> {
    mean: F,
    variance: F,
}

impl<F: Scalar> Gaussian<F> {
    pub fn new(mean: F, variance: F) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::invalid(format!("gaussian mean must be finite, got {mean}")));
        }
        if !(variance > F::zero()) || !variance.is_finite() {
            return Err(Error::invalid(format!(
                "gaussian variance must be positive and finite, got {variance}"
            )));
        }
        Ok(Gaussian { mean, variance })
    }

    pub fn mean(&self) -> F {
        self.mean
    }

    pub fn variance(&self) -> F {
        self.variance
    }

    /// Differential entropy `1/2 + 1/2 ln(2 pi sigma^2)`; negative for small variances.
    pub fn entropy(&self) -> F {
        let half = F::lit(0.5);
        half + half * (F::TAU() * self.variance).ln()
    }

    pub fn nll(&self, y: F) -> F {
        let half = F::lit(0.5);
        let r = y - self.mean;
        half * (F::TAU() * self.variance).ln() + r * r / (F::lit(2.0) * self.variance)
    }
}

impl<F: Scalar> TryFrom<GaussianRepr<F>> for Gaussian<F> {
    type Error = Error;
    fn try_from(r: GaussianRepr<F>) -> Result<Self> {
        Self::new(r.mean, r.variance)
    }
}

impl<F> From<Gaussian<F>> for GaussianRepr<F> {
    fn from(g: Gaussian<F>) -> Self {
        GaussianRepr {
            mean: g.mean,
            variance: g.variance,
        }
    }
}

/// A model's full predictive distribution `q(Y | x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", bound = "F: Scalar")]
pub enum PredictiveDistribution<F> {
    Categorical(Categorical<F>),
    Gaussian(Gaussian<F>),
}

impl<F: Scalar> PredictiveDistribution<F> {
    pub fn categorical(probs: Vec<F>) -> Result<Self> {
        Categorical::new(probs).map(Self::Categorical)
    }

    pub fn gaussian(mean: F, variance: F) -> Result<Self> {
        Gaussian::new(mean, variance).map(Self::Gaussian)
    }

    /// Entropy in nats (Shannon for categorical, differential for Gaussian).
    pub fn entropy(&self) -> F {
        match self {
            Self::Categorical(c) => c.entropy(),
            Self::Gaussian(g) => g.entropy(),
        }
    }

    /// `-ln q(y)` in nats. Class probabilities are floored at [`NLL_PROB_FLOOR`].
    pub fn nll(&self, y: Target<F>) -> Result<F> {
        match (self, y) {
            (Self::Categorical(c), Target::Class(k)) => c.nll(k),
            (Self::Gaussian(g), Target::Real(v)) => {
                if !v.is_finite() {
                    return Err(Error::invalid(format!("non-finite target {v}")));
                }
                Ok(g.nll(v))
            }
            (Self::Categorical(_), Target::Real(_)) => Err(Error::TaskMismatch {
                expected: "class target".into(),
                found: "real target".into(),
            }),
            (Self::Gaussian(_), Target::Class(_)) => Err(Error::TaskMismatch {
                expected: "real target".into(),
                found: "class target".into(),
            }),
        }
    }

    /// Point summary: the Gaussian mean, or the probability of `class` for categorical.
    pub fn mean_or_prob(&self, class: usize) -> F {
        match self {
            Self::Gaussian(g) => g.mean(),
            Self::Categorical(c) => c.probs().get(class).copied().unwrap_or_else(F::zero),
        }
    }

    pub fn task(&self) -> TaskKind {
        match self {
            Self::Categorical(c) => TaskKind::Classification {
                n_classes: c.n_classes(),
            },
            Self::Gaussian(_) => TaskKind::Regression,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn entropy_closed_forms() {
        let d = PredictiveDistribution::categorical(vec![0.5, 0.5]).unwrap();
        assert!(close(d.entropy(), std::f64::consts::LN_2, 1e-12));
        let d = PredictiveDistribution::categorical(vec![1.0, 0.0]).unwrap();
        assert_eq!(d.entropy(), 0.0);
        let v = 1.0 / (std::f64::consts::TAU * std::f64::consts::E);
        let d = PredictiveDistribution::gaussian(3.7, v).unwrap();
        assert!(close(d.entropy(), 0.0, 1e-12));
        let d = PredictiveDistribution::gaussian(0.0, 1.0).unwrap();
        assert!(close(d.entropy(), 1.418_938_533_204_672_7, 1e-12));
    }

    #[test]
    fn nll_closed_forms() {
        let g = PredictiveDistribution::gaussian(0.0, 1.0).unwrap();
        assert!(close(g.nll(Target::Real(0.0)).unwrap(), 0.918_938_533_204_672_7, 1e-12));
        let c = PredictiveDistribution::categorical(vec![0.25, 0.75]).unwrap();
        assert!(close(c.nll(Target::Class(0)).unwrap(), 4.0_f64.ln(), 1e-12));
        let g = PredictiveDistribution::gaussian(1.0, 4.0).unwrap();
        let expected = 0.5 * (8.0 * std::f64::consts::PI).ln() + 0.5;
        assert!(close(g.nll(Target::Real(3.0)).unwrap(), expected, 1e-12));
        assert!(close(expected, 2.112_085_713_764_618, 1e-12));
    }

    #[test]
    fn rejects_invalid_distributions() {
        assert!(Categorical::new(vec![1.0_f64]).is_err());
        assert!(Categorical::new(vec![0.6_f64, 0.6]).is_err());
        assert!(Categorical::new(vec![-0.1_f64, 1.1]).is_err());
        assert!(Categorical::new(vec![f64::NAN, 1.0]).is_err());
        assert!(Gaussian::new(0.0_f64, 0.0).is_err());
        assert!(Gaussian::new(0.0_f64, -1.0).is_err());
        assert!(Gaussian::new(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn nll_errors_and_clamp() {
        let c = PredictiveDistribution::categorical(vec![1.0_f64, 0.0]).unwrap();
        assert!(c.nll(Target::Class(2)).is_err());
        assert!(c.nll(Target::Real(0.0)).is_err());
        let clamped = c.nll(Target::Class(1)).unwrap();
        assert!(close(clamped, -(1e-12_f64).ln(), 1e-9));
        let g = PredictiveDistribution::gaussian(0.0_f64, 1.0).unwrap();
        assert!(g.nll(Target::Class(0)).is_err());
        assert!(g.nll(Target::Real(f64::NAN)).is_err());
    }

    #[test]
    fn deserialization_validates() {
        let ok: PredictiveDistribution<f64> =
            serde_json::from_str(r#"{"gaussian":{"mean":1.0,"variance":2.0}}"#).unwrap();
        assert_eq!(ok, PredictiveDistribution::gaussian(1.0, 2.0).unwrap());
        assert!(serde_json::from_str::<PredictiveDistribution<f64>>(
            r#"{"gaussian":{"mean":1.0,"variance":0.0}}"#
        )
        .is_err());
        assert!(
            serde_json::from_str::<PredictiveDistribution<f64>>(r#"{"categorical":[0.3,0.3]}"#)
                .is_err()
        );
    }

    #[test]
    fn works_in_f32() {
        let d = PredictiveDistribution::<f32>::gaussian(0.0, 1.0).unwrap();
        assert!((d.entropy() - 1.418_938_5).abs() < 1e-6);
        let c = PredictiveDistribution::<f32>::categorical(vec![0.1, 0.2, 0.7]).unwrap();
        assert!(c.entropy() > 0.0);
    }

    fn probs_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(1e-6_f64..1.0, 2..8).prop_map(|w| {
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect()
        })
    }

    proptest! {
        #[test]
        fn categorical_entropy_bounded(p in probs_strategy()) {
            let k = p.len();
            let c = Categorical::new(p).unwrap();
            let h = c.entropy();
            prop_assert!(h >= 0.0 && h <= (k as f64).ln() + 1e-12);
            let uniform = Categorical::new(vec![1.0 / k as f64; k]).unwrap();
            prop_assert!(h <= uniform.entropy() + 1e-12);
        }

        #[test]
        fn entropy_is_expected_nll(p in probs_strategy()) {
            let c = Categorical::new(p.clone()).unwrap();
            let expected: f64 = p.iter().enumerate().map(|(k, &pk)| pk * c.nll(k).unwrap()).sum();
            prop_assert!((expected - c.entropy()).abs() < 1e-9);
        }

        #[test]
        fn gaussian_entropy_doubling(mean in -10.0_f64..10.0, var in 1e-6_f64..1e6) {
            let a = Gaussian::new(mean, var).unwrap();
            let b = Gaussian::new(mean, 2.0 * var).unwrap();
            prop_assert!(b.entropy() > a.entropy());
            prop_assert!((b.entropy() - a.entropy() - 0.5 * std::f64::consts::LN_2).abs() < 1e-9);
        }

        #[test]
        fn gaussian_nll_minimized_at_mean(mean in -10.0_f64..10.0, var in 1e-3_f64..1e3, dy in -5.0_f64..5.0) {
            let g = Gaussian::new(mean, var).unwrap();
            prop_assert!(g.nll(mean) <= g.nll(mean + dy));
        }
    }
}
